#pragma once

#include "psys/choice.hpp"
#include "psys/compiled.hpp"
#include "psys/decider.hpp"
#include "psys/error.hpp"
#include "psys/inner.hpp"
#include "psys/model.hpp"
#include "psys/multiset.hpp"
#include "psys/outer.hpp"
#include "psys/parse.hpp"
#include "psys/reference.hpp"
#include "psys/tables.hpp"
