#pragma once

#include <vector>

#include "ergm/graph.hpp"
#include "ergm/rng.hpp"

namespace ergm {

// Small dense symmetric positive-definite matrix with its lower Cholesky
// factor; dimensions here are the statistic dimension (<= 3 in practice).
struct SpdMatrix {
    int dim = 0;
    std::vector<double> m;  // row-major dim x dim

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * dim + c]; }
    static SpdMatrix diagonal(const std::vector<double>& diag);
    static SpdMatrix identity_scaled(int dim, double scale);
};

struct CholFactor {
    int dim = 0;
    std::vector<double> lower;  // row-major, upper triangle zero
    double log_det_cov = 0.0;   // 2 * sum log diag
};

// Throws std::invalid_argument if the matrix is not symmetric positive definite.
CholFactor cholesky(const SpdMatrix& a);

struct PriorSpec {
    ThetaVector mean;
    SpdMatrix covariance;

    int dim() const { return static_cast<int>(mean.size()); }
    void validate() const;
    static PriorSpec normal(const ThetaVector& mean, const std::vector<double>& cov_diag);
};

struct ProposalSpec {
    SpdMatrix covariance;
    static ProposalSpec isotropic(int dim, double sd);
};

// Full multivariate normal log density (constants included).
double log_mvn_density(const ThetaVector& x, const ThetaVector& mean, const CholFactor& chol);

ThetaVector sample_mvn(const ThetaVector& mean, const CholFactor& chol, Rng& rng);

double log_prior(const ThetaVector& theta, const PriorSpec& prior);
ThetaVector sample_prior(const PriorSpec& prior, Rng& rng);

}  // namespace ergm
