#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>

#include "ccgnav/ccg.hpp"
#include "ccgnav/unconstrained.hpp"

namespace ccgnav {

inline constexpr double kMembershipTol = 1e-6;
inline constexpr double kMembershipGamma = 10.0;

struct MembershipResult {
    bool inside = false;
    /// max_j f_j at the final iterate: an upper bound of min over the fiber of max_j f_j.
    double margin = 0.0;
    Vector eta;
};

/// Decides whether p = Gt eta + ct for some eta with max_j f_j(eta) <= tol.
///
/// Minimizes the smoothed maximum over the affine fiber for gamma = gamma_test, 10 gamma_test,
/// ... up to 1e9, stopping as soon as the iterate certifies membership or the smoothing
/// lower bound certifies non-membership. Points off the affine hull of the generators are
/// rejected by a range residual test.
MembershipResult membership(const UnconstrainedForm& form, const Vector& p,
                            double gamma_test = kMembershipGamma, double tol = kMembershipTol);

bool contains(const UnconstrainedForm& form, const Vector& p,
              double gamma_test = kMembershipGamma, double tol = kMembershipTol);
bool contains(const CCG& z, const Vector& p, double gamma_test = kMembershipGamma,
              double tol = kMembershipTol);

/// An eta with max_j f_j(eta) < 0 (0 when that already works). Throws EmptySetError if the
/// generator set restricted by the constraints has empty interior or is empty.
Vector interior_eta(const UnconstrainedForm& form);

/// Random member: a ray from an interior eta in a Gaussian direction, scaled to a uniform
/// fraction of its exact exit distance. Deterministic for a given rng state.
Vector sample_point(const UnconstrainedForm& form, std::mt19937_64& rng);
Vector sample_point(const CCG& z, std::mt19937_64& rng);

/// Argmax of d^T x over the set, by a log-barrier interior-point method.
struct SupportResult {
    double value = 0.0;
    Vector point;
    Vector eta;
};

SupportResult support(const UnconstrainedForm& form, const Vector& d, const Vector* warm = nullptr);
SupportResult support(const CCG& z, const Vector& d);

/// Boundary polyline of a 2D set from support points along `directions` equally spaced angles.
std::vector<Eigen::Vector2d> contour(const CCG& z, int directions = 128);

/// Shoelace area of a closed polygon.
double polygon_area(const std::vector<Eigen::Vector2d>& poly);

}  // namespace ccgnav
