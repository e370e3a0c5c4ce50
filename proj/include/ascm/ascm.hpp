#pragma once

// Umbrella header: the whole toolkit in dependency order.

#include "rational.hpp"
#include "dsl.hpp"
#include "scm.hpp"
#include "graph.hpp"
#include "admissibility.hpp"
#include "ctf.hpp"
#include "generators.hpp"
