#include "ergm/mvn.hpp"

#include <cmath>
#include <stdexcept>

namespace ergm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

SpdMatrix SpdMatrix::diagonal(const std::vector<double>& diag) {
    SpdMatrix out;
    out.dim = static_cast<int>(diag.size());
    out.m.assign(static_cast<std::size_t>(out.dim) * out.dim, 0.0);
    for (int i = 0; i < out.dim; ++i) out.m[static_cast<std::size_t>(i) * out.dim + i] = diag[i];
    return out;
}

SpdMatrix SpdMatrix::identity_scaled(int dim, double scale) {
    return diagonal(std::vector<double>(static_cast<std::size_t>(dim), scale));
}

CholFactor cholesky(const SpdMatrix& a) {
    const int d = a.dim;
    if (d < 1) throw std::invalid_argument("cholesky: empty matrix");
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < r; ++c) {
            if (std::abs(a(r, c) - a(c, r)) > 1e-12 * (1.0 + std::abs(a(r, c)))) {
                throw std::invalid_argument("cholesky: matrix is not symmetric");
            }
        }
    }
    CholFactor f;
    f.dim = d;
    f.lower.assign(static_cast<std::size_t>(d) * d, 0.0);
    auto L = [&](int r, int c) -> double& { return f.lower[static_cast<std::size_t>(r) * d + c]; };
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c <= r; ++c) {
            double acc = a(r, c);
            for (int k = 0; k < c; ++k) acc -= L(r, k) * L(c, k);
            if (r == c) {
                if (acc <= 0.0) {
                    throw std::invalid_argument("cholesky: matrix is not positive definite");
                }
                L(r, c) = std::sqrt(acc);
                f.log_det_cov += 2.0 * std::log(L(r, c));
            } else {
                L(r, c) = acc / L(c, c);
            }
        }
    }
    return f;
}

void PriorSpec::validate() const {
    if (covariance.dim != dim()) {
        throw std::invalid_argument("PriorSpec: covariance dimension mismatch");
    }
    cholesky(covariance);
}

PriorSpec PriorSpec::normal(const ThetaVector& mean, const std::vector<double>& cov_diag) {
    if (mean.size() != cov_diag.size()) {
        throw std::invalid_argument("PriorSpec: mean/covariance dimension mismatch");
    }
    return PriorSpec{mean, SpdMatrix::diagonal(cov_diag)};
}

ProposalSpec ProposalSpec::isotropic(int dim, double sd) {
    return ProposalSpec{SpdMatrix::identity_scaled(dim, sd * sd)};
}

double log_mvn_density(const ThetaVector& x, const ThetaVector& mean, const CholFactor& chol) {
    const int d = chol.dim;
    if (static_cast<int>(x.size()) != d || static_cast<int>(mean.size()) != d) {
        throw std::invalid_argument("log_mvn_density: dimension mismatch");
    }
    // Forward-substitute L y = (x - mean); the quadratic form is |y|^2.
    std::vector<double> y(static_cast<std::size_t>(d));
    double quad = 0.0;
    for (int r = 0; r < d; ++r) {
        double acc = x[r] - mean[r];
        for (int c = 0; c < r; ++c) acc -= chol.lower[static_cast<std::size_t>(r) * d + c] * y[c];
        y[r] = acc / chol.lower[static_cast<std::size_t>(r) * d + r];
        quad += y[r] * y[r];
    }
    return -0.5 * (d * kLog2Pi + chol.log_det_cov + quad);
}

ThetaVector sample_mvn(const ThetaVector& mean, const CholFactor& chol, Rng& rng) {
    const int d = chol.dim;
    std::vector<double> z(static_cast<std::size_t>(d));
    for (double& v : z) v = rng.normal();
    ThetaVector out(mean);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c <= r; ++c) {
            out[r] += chol.lower[static_cast<std::size_t>(r) * d + c] * z[c];
        }
    }
    return out;
}

double log_prior(const ThetaVector& theta, const PriorSpec& prior) {
    if (theta.size() != prior.mean.size()) {
        throw std::invalid_argument("log_prior: dimension mismatch");
    }
    return log_mvn_density(theta, prior.mean, cholesky(prior.covariance));
}

ThetaVector sample_prior(const PriorSpec& prior, Rng& rng) {
    return sample_mvn(prior.mean, cholesky(prior.covariance), rng);
}

}  // namespace ergm
