#pragma once

#include "fowt/active_learning.hpp"
#include "fowt/fd_model.hpp"
#include "fowt/pipeline.hpp"

#include <vector>

namespace fowt::testing {

/// Tables with every matrix diagonal: seven uncoupled oscillators. Added mass
/// and radiation damping vary with frequency so the check is not trivial.
CoefficientTables diagonal_tables(const FrequencyGrid& grid);

/// Analytic response of DoF k of diagonal_tables to unit wave amplitude.
Complex diagonal_sdof(const CoefficientTables& t, int k, std::size_t i, double drag_damping = 0.0);

/// Coarse-resolution version of the synthetic benchmark with its exact full grid,
/// shared across test cases.
struct SmallBenchmark
{
  Benchmark benchmark;
  std::vector<BinDomain> domains;
  SeaStateEvaluator evaluator;
  FullGrid grid;
};

const SmallBenchmark& small_benchmark();

/// Relative difference |a - b| / max(|b|, tiny).
double rel(double a, double b);

} // namespace fowt::testing
