#pragma once

#include <Eigen/Dense>

#include "lpk/born_series.hpp"
#include "lpk/oracle.hpp"
#include "lpk/resolvent_ops.hpp"

/// Serial reference versions of the OpenMP kernels. Tests compare them with the parallel code;
/// the benchmark target times both.
namespace lpk::reference {

/// V R_0^+(lambda^2) on the grid, row by row through free_resolvent_kernel.
Eigen::MatrixXcd assemble_VR0(const PotentialModel& V, double lambda, const QuadratureGrid& grid);

/// Chain Monte Carlo with the same block seeding as lpk::born_term_mc, run on one thread.
KernelEvaluation born_term_mc(int n, double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx,
                              std::size_t samples, std::uint64_t stream = 0, bool majorant = false);

/// One partial wave by dense symmetric diagonalization (no windowing, all rows kept).
PartialWave solve_wave_dense(int l, const RadialDiscretization& disc, const PotentialModel& V);

/// Partial-wave synthesis with Legendre values from Boost and a direct cubic Lagrange stencil.
double multiplier_kernel(const SpectralMultiplier& m, const Vec3& x, const Vec3& y, const SpectralData& data);

} // namespace lpk::reference
