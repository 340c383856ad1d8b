#pragma once

// Discrete Besov-type regularity functionals: increment averages over a
// ball of shifts, their mollified counterparts, and exponent estimation.

#include <string>
#include <vector>

#include "conslab/grid.hpp"
#include "conslab/mollify.hpp"
#include "conslab/scaling.hpp"

namespace conslab {

// (1/eps^{d + alpha p}) * sum_{|y| <= eps} cellvol * int |f(x) - f(x-y)|^p dx,
// the inner sum running over all whole-cell offsets y inside the shift ball
// (y = 0 included; it contributes nothing). Vector fields use the pointwise
// Euclidean norm of the increment.
double besov_functional(const ScalarField& f, double p, double alpha, double eps);
double besov_functional(const VectorField& u, double p, double alpha, double eps);

// eps^{-alpha} * ||f - f_eps||_p. Satisfies value^p <= besov_functional + 1e-8
// (discrete Jensen, since the kernel sup is < 1 in d <= 3).
double mollified_increment_norm(const ScalarField& f, double p, double alpha,
                                const MollifierKernel& kernel);

// eps^{1 - alpha} * ||grad f_eps||_p (Euclidean norm of the gradient).
double gradient_bound(const ScalarField& f, double p, double alpha,
                      const MollifierKernel& kernel);

struct HolderEstimate {
    double alpha_hat = 0.0;
    double fit_quality = 0.0;
    std::string flag;  // empty, or "unresolved" when the data shows no scaling
};

// p = 2 structure-function slope over the ladder, halved. Estimates are
// capped at 1 and flagged "unresolved" when alpha_hat <= 0.1.
HolderEstimate holder_exponent_estimate(const ScalarField& f, const EpsilonLadder& ladder);

struct EnsembleSet {
    std::vector<VectorField> members;
    std::vector<double> weights;  // positive, summing to 1 (tolerance 1e-12)

    void validate() const;
};

// Weighted average of the member Besov functionals.
double ensemble_besov(const EnsembleSet& ens, double p, double alpha, double eps);

}  // namespace conslab
