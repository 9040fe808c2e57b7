#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wavefront {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx I{0.0, 1.0};

/// A complex point left the holomorphy tube of a coefficient field.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Japanese bracket <x> = sqrt(1 + |x|^2).
inline double japanese(double x) { return std::sqrt(1.0 + x * x); }
inline double japanese(const RVec& x) { return std::sqrt(1.0 + x.squaredNorm()); }

/// Holomorphic bilinear pairing sum_j a_j b_j (no conjugation).
inline cplx dot(const CVec& a, const CVec& b) { return (a.array() * b.array()).sum(); }

inline CVec complexify(const RVec& x) { return x.cast<cplx>(); }

}  // namespace wavefront
