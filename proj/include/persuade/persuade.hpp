#pragma once

#include "persuade/config.hpp"
#include "persuade/error.hpp"
#include "persuade/evaluate.hpp"
#include "persuade/experiments.hpp"
#include "persuade/greedy.hpp"
#include "persuade/grid.hpp"
#include "persuade/hull.hpp"
#include "persuade/model.hpp"
#include "persuade/parallel.hpp"
#include "persuade/splitting.hpp"
#include "persuade/value_iteration.hpp"
