#pragma once

// Information quantities of a finite source pushed through a test channel
// p(xhat|x). All logarithms are base 2.

#include <span>
#include <vector>

#include "rdpc/datamodel.hpp"

namespace rdpc::oracle {

/// Row-stochastic p(xhat|x), nx x nxhat.
using Channel = Matrix;

double entropy_bits(std::span<const double> p);

/// q(xhat) = sum_x p(x) W(x, xhat).
std::vector<double> output_marginal(std::span<const double> px, const Channel& w);

/// I(X; Xhat) of the joint p(x) W(x, xhat).
double mutual_information(std::span<const double> px, const Channel& w);

/// dI/dW(x, y) = p(x) log2(W(x, y) / q(y)).
Matrix mutual_information_gradient(std::span<const double> px, const Channel& w);

/// E[Delta(X, Xhat)].
double expected_distortion(std::span<const double> px, const Matrix& delta, const Channel& w);

/// Total variation between p_X and q over the union alphabet (missing
/// symbols carry zero mass).
double total_variation(std::span<const double> p, std::span<const double> q);

/// Joint p(s, xhat) = sum_x p(x) p(s|x) W(x, xhat), |S| x nxhat.
Matrix label_joint(std::span<const double> px, const Matrix& label, const Channel& w);

/// H(S | Xhat) where S and Xhat interact only through X.
double conditional_entropy(std::span<const double> px, const Matrix& label, const Channel& w);

/// dH(S|Xhat)/dW(x, y) = -sum_s p(x) p(s|x) log2(p(s, y) / q(y)).
Matrix conditional_entropy_gradient(std::span<const double> px, const Matrix& label, const Channel& w);

struct ConstraintValues {
    double distortion = 0.0;
    double perception = 0.0;
    std::vector<double> classification;
};

/// (E[Delta], TV(p_X, p_Xhat), [H(S_k|Xhat)]_k) for the given channel.
ConstraintValues constraint_values(const DiscreteSource& source, const Channel& w);

/// Largest amount by which `values` exceed the budgets in `point`; 0 when
/// every constraint holds.
double max_violation(const ConstraintValues& values, const ConstraintPoint& point);

}  // namespace rdpc::oracle
