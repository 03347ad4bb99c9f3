#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qid/rng.hpp"

namespace qid {

/// Dense finite joint distribution over named variables. Entries are
/// validated to be nonnegative and to sum to 1 within 1e-12; the product
/// alphabet is capped at 2^20 atoms.
class JointDistribution {
public:
    JointDistribution(std::vector<std::string> names, std::vector<size_t> sizes,
                      std::vector<double> probs);

    static JointDistribution
    from_function(std::vector<std::string> names, std::vector<size_t> sizes,
                  const std::function<double(const std::vector<size_t>&)>& f);

    size_t arity() const { return sizes_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<size_t>& sizes() const { return sizes_; }
    size_t var(const std::string& name) const;
    size_t atom_count() const { return p_.size(); }

    double prob(const std::vector<size_t>& idx) const { return p_[offset(idx)]; }
    void for_each(const std::function<void(const std::vector<size_t>&, double)>& fn) const;

    JointDistribution marginal(const std::vector<std::string>& keep) const;

    /// Normalized conditional on a predicate over full index tuples, plus
    /// the event probability.
    std::pair<JointDistribution, double>
    condition(const std::function<bool(const std::vector<size_t>&)>& pred) const;

    /// Marginal table of target tuple x given tuple y, flattened.
    /// columns[y_index][x_index]; used by the entropy routines.
    std::vector<std::vector<double>> table(const std::vector<std::string>& targets,
                                           const std::vector<std::string>& givens) const;

private:
    size_t offset(const std::vector<size_t>& idx) const;
    void validate() const;

    std::vector<std::string> names_;
    std::vector<size_t> sizes_;
    std::vector<double> p_;
};

/// Conditional min-entropy -log2 sum_y max_x P(x, y); exact.
double hmin(const JointDistribution& dist, const std::vector<std::string>& targets,
            const std::vector<std::string>& givens = {});

/// Smooth conditional min-entropy: the max over events of probability
/// >= 1 - eps. Exact by convex water-filling: mass is removed from the
/// per-column maxima at the steepest aggregate descent (fewest tied atoms
/// first) until the budget is spent.
double hmin_smooth(const JointDistribution& dist, const std::vector<std::string>& targets,
                   const std::vector<std::string>& givens, double eps);

/// Guessing probability after optimal eps-smoothing of a column table;
/// the core of hmin_smooth, exposed for oracle comparison in tests.
double smoothed_guessing_probability(const std::vector<std::vector<double>>& columns, double eps);

/// The explicit witness construction for entropy splitting: scanning
/// j = 1..m-1 in variable order, V is the first index whose conditional
/// probability given z reaches 2^(-alpha/2) while all earlier ones stay
/// below; V = m when no index qualifies. Returns the input joint extended
/// by the variable "V" (values 0..m-1 for indices 1..m).
JointDistribution split_witness(const JointDistribution& dist,
                                const std::vector<std::string>& x_names,
                                const std::string& z_name, double alpha);

struct SplittingReport {
    bool applicable = false;  // preconditions held
    bool holds = false;       // bound satisfied
    double alpha = 0;         // pairwise smooth min-entropy floor used
    double bound = 0;         // alpha/2 - log2(m) - 1
    double actual = 0;        // Hmin^{2m eps}(X_W | V W Z, V != W)
    double pairwise_min = 0;  // min over pairs of Hmin^eps(X_i X_j | Z)
    std::string note;
};

/// Checks the entropy-splitting statement on a concrete joint: pairwise
/// smooth min-entropies at least alpha imply the witnessed X_W keeps
/// alpha/2 - log2(m) - 1 bits given V, W, Z and V != W.
SplittingReport verify_entropy_splitting(const JointDistribution& dist,
                                         const std::vector<std::string>& x_names,
                                         const std::string& z_name, double alpha, double eps,
                                         const std::vector<double>& w_dist);

} // namespace qid
