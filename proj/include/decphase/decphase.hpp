#pragma once

#include "errors.hpp"
#include "linalg.hpp"
#include "oracle.hpp"
#include "paths.hpp"
#include "phases.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "selftest.hpp"
#include "states.hpp"
#include "transport.hpp"
