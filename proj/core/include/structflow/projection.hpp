#pragma once

#include <span>
#include <vector>

namespace structflow {

/// Euclidean projection of a non-negative vector onto
/// {γ >= 0 : Σ γ_j <= radius}. Returns v itself when already feasible.
/// Expected linear time (median-of-3 pivoting with a sorting fallback).
/// Throws std::invalid_argument on a negative radius or a negative entry.
std::vector<double> project_l1_ball(std::span<const double> v, double radius);

/// Same projection with the extra box 0 <= γ_j <= ub_j.
std::vector<double> project_l1_ball_box(std::span<const double> v, double radius,
                                        std::span<const double> ub);

/// Allocation-free forms; `out` must have v.size() entries and `scratch`
/// is resized as needed.
void project_l1_ball(std::span<const double> v, double radius, std::span<double> out,
                     std::vector<double>& scratch);
void project_l1_ball_box(std::span<const double> v, double radius, std::span<const double> ub,
                         std::span<double> out, std::vector<double>& scratch);

/// Threshold θ >= 0 with Σ_j (v_j - θ)_+ = radius, for Σ_j v_j > radius.
/// Reorders `values` in place.
double l1_threshold(std::span<double> values, double radius);

}  // namespace structflow
