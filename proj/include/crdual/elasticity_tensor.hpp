#pragma once

#include <crdual/types.hpp>

#include <cmath>

namespace crdual {

/// Isotropic elasticity tensor in two dimensions with Lame parameters (mu, lambda).
class ElasticityTensor {
public:
    ElasticityTensor(double mu, double lambda) : mu_(mu), lambda_(lambda)
    {
        if (!(mu > 0.0) || !(lambda > 0.0) || !std::isfinite(mu) || !std::isfinite(lambda)) {
            throw Error("ElasticityTensor: mu and lambda must be positive");
        }
    }

    double mu() const { return mu_; }
    double lambda() const { return lambda_; }

    /// C A = 2 mu A + lambda tr(A) I.
    Mat2 apply(const Mat2& a) const { return 2.0 * mu_ * a + lambda_ * a.trace() * Mat2::Identity(); }

    /// C^{-1} B = dev B / (2 mu) + tr(B) I / (2 d mu + d^2 lambda), d = 2.
    Mat2 apply_inverse(const Mat2& b) const
    {
        return dev(b) / (2.0 * mu_) + b.trace() / (4.0 * mu_ + 4.0 * lambda_) * Mat2::Identity();
    }

    /// |C^{1/2} A|^2 = A : C A.
    double energy_norm_squared(const Mat2& a) const { return ddot(a, apply(a)); }

    /// |C^{-1/2} B|^2 = B : C^{-1} B.
    double compliance_norm_squared(const Mat2& b) const { return ddot(b, apply_inverse(b)); }

private:
    double mu_;
    double lambda_;
};

} // namespace crdual
