#pragma once

#include <huge/benchmark.hpp>
#include <huge/datagen.hpp>
#include <huge/error.hpp>
#include <huge/estimators.hpp>
#include <huge/io.hpp>
#include <huge/lasso.hpp>
#include <huge/nonparanormal.hpp>
#include <huge/parallel.hpp>
#include <huge/pipeline.hpp>
#include <huge/screening.hpp>
#include <huge/selection.hpp>
#include <huge/types.hpp>
