#pragma once

#include "hetmean/core.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace hetmean {

//! Center of the densest window of half-length s.
struct ModalResult
{
  double center = 0.0;
  std::size_t count = 0;
  // 1-based indices into the sorted sample delimiting the chosen window.
  std::size_t window_lo_index = 0;
  std::size_t window_hi_index = 0;
};

enum class GridMode
{
  dyadic,
  pairwise
};

GridMode parse_grid_mode(std::string_view name);
std::string_view to_string(GridMode mode);

struct AdaptiveReport
{
  double estimate = 0.0;
  double alpha = 0.0;
  Interval median_interval;
  std::vector<double> accepted_lengths;
  Interval final_interval;
  bool fallback_used = true;
  // Modal fit at the smallest accepted length (meaningful only when
  // accepted_lengths is non-empty).
  ModalResult finest_modal;
  double finest_length = 0.0;
};

struct AcceptDecision
{
  bool accepted = false;
  ModalResult modal;
  std::size_t far_count = 0;
};

double sample_mean(const Sample& sample);

//! Inverse-variance weighted mean; needs the true scale of every observation.
double weighted_mean_oracle(std::span<const double> values, std::span<const double> sigmas);

//! X_(n/2) for even n, X_((n+1)/2) for odd n.
double sample_median(const Sample& sample);

//! [X_(c-k), X_(c+k)] with k = ceil(alpha sqrt(n)), c = floor(n/2), clamped to [1, n].
Interval median_interval(const Sample& sample, double alpha);

//! Confidence level used for the median interval: sqrt(2 log(6/delta)).
double median_interval_alpha(double delta);

//! Number of observations in [x - s, x + s].
std::size_t count_in(const Sample& sample, double x, double s);

/**
 * Densest closed window of half-length s.
 *
 * Among windows achieving the maximum count, the narrowest wins and then the
 * leftmost; the center is the midpoint of the chosen window.
 */
ModalResult modal_interval(const Sample& sample, double s);

//! max D_s(x) over x with |x - center| >= exclusion_radius; 0 if no such x
//! covers a data point.
std::size_t max_count_excluding(const Sample& sample,
                                double s,
                                double center,
                                double exclusion_radius);

//! Data-only acceptance test for the modal window of half-length s.
AcceptDecision accept(const Sample& sample, double s, const Constants& constants);

//! Candidate half-lengths, sorted decreasing.
std::vector<double> candidate_lengths(const Interval& median_iv,
                                      GridMode mode,
                                      const Sample& sample);

// Largest sample accepted by the pairwise grid.
inline constexpr std::size_t pairwise_max_n = 2048;

AdaptiveReport adaptive_estimate(const Sample& sample,
                                 const Constants& constants,
                                 GridMode mode = GridMode::dyadic);

//! Mean of the observations inside `interval`.
double modal_mean(const Sample& sample, const Interval& interval);

} // namespace hetmean
