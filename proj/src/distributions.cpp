#include "qid/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qid {

JointDistribution::JointDistribution(std::vector<std::string> names, std::vector<size_t> sizes,
                                     std::vector<double> probs)
    : names_(std::move(names)), sizes_(std::move(sizes)), p_(std::move(probs)) {
    validate();
}

JointDistribution
JointDistribution::from_function(std::vector<std::string> names, std::vector<size_t> sizes,
                                 const std::function<double(const std::vector<size_t>&)>& f) {
    size_t total = 1;
    for (size_t s : sizes) total *= s;
    std::vector<double> probs(total);
    std::vector<size_t> idx(sizes.size(), 0);
    for (size_t k = 0; k < total; ++k) {
        probs[k] = f(idx);
        for (size_t d = sizes.size(); d-- > 0;) {
            if (++idx[d] < sizes[d]) break;
            idx[d] = 0;
        }
    }
    return JointDistribution(std::move(names), std::move(sizes), std::move(probs));
}

void JointDistribution::validate() const {
    if (names_.size() != sizes_.size())
        throw std::invalid_argument("JointDistribution: names/sizes mismatch");
    size_t total = 1;
    for (size_t s : sizes_) {
        if (s == 0) throw std::invalid_argument("JointDistribution: empty alphabet");
        total *= s;
        if (total > (size_t(1) << 20))
            throw std::invalid_argument("JointDistribution: product alphabet too large");
    }
    if (p_.size() != total) throw std::invalid_argument("JointDistribution: table size mismatch");
    double sum = 0;
    for (double v : p_) {
        if (v < -1e-15) throw std::invalid_argument("JointDistribution: negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("JointDistribution: probabilities must sum to 1");
}

size_t JointDistribution::var(const std::string& name) const {
    for (size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    throw std::invalid_argument("JointDistribution: unknown variable " + name);
}

size_t JointDistribution::offset(const std::vector<size_t>& idx) const {
    if (idx.size() != sizes_.size()) throw std::invalid_argument("JointDistribution: bad index");
    size_t off = 0;
    for (size_t d = 0; d < sizes_.size(); ++d) {
        if (idx[d] >= sizes_[d]) throw std::out_of_range("JointDistribution: index out of range");
        off = off * sizes_[d] + idx[d];
    }
    return off;
}

void JointDistribution::for_each(
    const std::function<void(const std::vector<size_t>&, double)>& fn) const {
    std::vector<size_t> idx(sizes_.size(), 0);
    for (size_t k = 0; k < p_.size(); ++k) {
        fn(idx, p_[k]);
        for (size_t d = sizes_.size(); d-- > 0;) {
            if (++idx[d] < sizes_[d]) break;
            idx[d] = 0;
        }
    }
}

JointDistribution JointDistribution::marginal(const std::vector<std::string>& keep) const {
    std::vector<size_t> dims;
    std::vector<size_t> out_sizes;
    for (const auto& name : keep) {
        dims.push_back(var(name));
        out_sizes.push_back(sizes_[dims.back()]);
    }
    size_t total = 1;
    for (size_t s : out_sizes) total *= s;
    std::vector<double> out(total, 0.0);
    for_each([&](const std::vector<size_t>& idx, double p) {
        size_t off = 0;
        for (size_t d = 0; d < dims.size(); ++d) off = off * out_sizes[d] + idx[dims[d]];
        out[off] += p;
    });
    return JointDistribution(keep, out_sizes, std::move(out));
}

std::pair<JointDistribution, double>
JointDistribution::condition(const std::function<bool(const std::vector<size_t>&)>& pred) const {
    std::vector<double> out(p_.size(), 0.0);
    double mass = 0;
    size_t k = 0;
    for_each([&](const std::vector<size_t>& idx, double p) {
        if (pred(idx)) {
            out[k] = p;
            mass += p;
        }
        ++k;
    });
    if (mass <= 0) throw std::invalid_argument("JointDistribution::condition: null event");
    for (double& v : out) v /= mass;
    return {JointDistribution(names_, sizes_, std::move(out)), mass};
}

std::vector<std::vector<double>>
JointDistribution::table(const std::vector<std::string>& targets,
                         const std::vector<std::string>& givens) const {
    if (targets.empty()) throw std::invalid_argument("entropy: empty target set");
    std::vector<std::string> keep = targets;
    keep.insert(keep.end(), givens.begin(), givens.end());
    JointDistribution m = marginal(keep);

    size_t tcount = 1, gcount = 1;
    for (size_t d = 0; d < targets.size(); ++d) tcount *= m.sizes_[d];
    for (size_t d = targets.size(); d < m.sizes_.size(); ++d) gcount *= m.sizes_[d];

    std::vector<std::vector<double>> cols(gcount, std::vector<double>(tcount, 0.0));
    std::vector<size_t> idx(m.sizes_.size(), 0);
    for (size_t k = 0; k < m.p_.size(); ++k) {
        size_t t = 0, g = 0;
        for (size_t d = 0; d < targets.size(); ++d) t = t * m.sizes_[d] + idx[d];
        for (size_t d = targets.size(); d < m.sizes_.size(); ++d) g = g * m.sizes_[d] + idx[d];
        cols[g][t] = m.p_[k];
        for (size_t d = m.sizes_.size(); d-- > 0;) {
            if (++idx[d] < m.sizes_[d]) break;
            idx[d] = 0;
        }
    }
    return cols;
}

double hmin(const JointDistribution& dist, const std::vector<std::string>& targets,
            const std::vector<std::string>& givens) {
    auto cols = dist.table(targets, givens);
    double pg = 0;
    for (const auto& col : cols) pg += *std::max_element(col.begin(), col.end());
    return -std::log2(pg);
}

double smoothed_guessing_probability(const std::vector<std::vector<double>>& columns,
                                     double eps) {
    // per-column level segments: shaving the top i atoms from level a_i to
    // a_(i+1) costs i * (a_i - a_(i+1)) mass and gains (a_i - a_(i+1))
    struct Segment {
        size_t ties;
        double width; // level drop
    };
    std::vector<Segment> segments;
    double pg = 0;
    for (const auto& col : columns) {
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end(), std::greater<double>());
        if (sorted.empty() || sorted[0] <= 0) continue;
        pg += sorted[0];
        for (size_t i = 0; i < sorted.size(); ++i) {
            double next = i + 1 < sorted.size() ? sorted[i + 1] : 0.0;
            if (sorted[i] > next) segments.push_back({i + 1, sorted[i] - next});
            if (next <= 0) break;
        }
    }
    std::stable_sort(segments.begin(), segments.end(),
                     [](const Segment& a, const Segment& b) { return a.ties < b.ties; });
    double budget = eps;
    for (const Segment& s : segments) {
        if (budget <= 0) break;
        double mass = double(s.ties) * s.width;
        if (mass <= budget) {
            pg -= s.width;
            budget -= mass;
        } else {
            pg -= budget / double(s.ties);
            budget = 0;
        }
    }
    return std::max(pg, 0.0);
}

double hmin_smooth(const JointDistribution& dist, const std::vector<std::string>& targets,
                   const std::vector<std::string>& givens, double eps) {
    if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("hmin_smooth: eps out of [0,1)");
    if (eps == 0.0) return hmin(dist, targets, givens);
    double pg = smoothed_guessing_probability(dist.table(targets, givens), eps);
    if (pg <= 0) return std::numeric_limits<double>::infinity();
    return -std::log2(pg);
}

JointDistribution split_witness(const JointDistribution& dist,
                                const std::vector<std::string>& x_names,
                                const std::string& z_name, double alpha) {
    size_t m = x_names.size();
    if (m < 2) throw std::invalid_argument("split_witness: need at least two variables");
    double threshold = std::pow(2.0, -alpha / 2.0);

    bool has_z = !z_name.empty();
    size_t zsize = has_z ? dist.sizes()[dist.var(z_name)] : 1;
    size_t zdim = has_z ? dist.var(z_name) : 0;

    // conditionals P_{X_j | Z}(x | z)
    std::vector<std::vector<std::vector<double>>> cond(m);
    std::vector<double> zmass(zsize, 0.0);
    dist.for_each([&](const std::vector<size_t>& idx, double p) {
        zmass[has_z ? idx[zdim] : 0] += p;
    });
    for (size_t jx = 0; jx < m; ++jx) {
        size_t d = dist.var(x_names[jx]);
        cond[jx].assign(zsize, std::vector<double>(dist.sizes()[d], 0.0));
        dist.for_each([&](const std::vector<size_t>& idx, double p) {
            cond[jx][has_z ? idx[zdim] : 0][idx[d]] += p;
        });
        for (size_t z = 0; z < zsize; ++z)
            for (double& v : cond[jx][z])
                if (zmass[z] > 0) v /= zmass[z];
    }

    std::vector<std::string> names = dist.names();
    names.push_back("V");
    std::vector<size_t> sizes = dist.sizes();
    sizes.push_back(m);
    size_t vdim = sizes.size() - 1;

    std::vector<size_t> xdims(m);
    for (size_t jx = 0; jx < m; ++jx) xdims[jx] = dist.var(x_names[jx]);

    return JointDistribution::from_function(names, sizes, [&](const std::vector<size_t>& idx) {
        size_t z = has_z ? idx[zdim] : 0;
        // the witness: first index with a "large" conditional, all earlier
        // ones small; m when none qualifies
        size_t v = m - 1;
        for (size_t jx = 0; jx + 1 < m; ++jx) {
            double pj = cond[jx][z][idx[xdims[jx]]];
            if (pj >= threshold) {
                v = jx;
                break;
            }
        }
        if (idx[vdim] != v) return 0.0;
        std::vector<size_t> base(idx.begin(), idx.begin() + long(vdim));
        return dist.prob(base);
    });
}

SplittingReport verify_entropy_splitting(const JointDistribution& dist,
                                         const std::vector<std::string>& x_names,
                                         const std::string& z_name, double alpha, double eps,
                                         const std::vector<double>& w_dist) {
    SplittingReport rep;
    rep.alpha = alpha;
    size_t m = x_names.size();
    rep.bound = alpha / 2.0 - std::log2(double(m)) - 1.0;

    std::vector<std::string> givens;
    if (!z_name.empty()) givens.push_back(z_name);

    // preconditions: pairwise smooth min-entropy >= alpha, Hmin(W) >= 1,
    // smoothing parameter below 1
    rep.pairwise_min = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j) {
            double h = hmin_smooth(dist, {x_names[i], x_names[j]}, givens, eps);
            rep.pairwise_min = std::min(rep.pairwise_min, h);
        }
    if (rep.pairwise_min < alpha - 1e-9) {
        rep.note = "pairwise smooth min-entropy below alpha";
        return rep;
    }
    if (w_dist.size() != m) throw std::invalid_argument("verify_entropy_splitting: W size");
    double wmax = *std::max_element(w_dist.begin(), w_dist.end());
    if (wmax > 0.5 + 1e-12) {
        rep.note = "Hmin(W) < 1";
        return rep;
    }
    double smooth2 = 2.0 * double(m) * eps;
    if (smooth2 >= 1.0) {
        rep.note = "2 m eps >= 1, smoothing undefined";
        return rep;
    }
    rep.applicable = true;

    JointDistribution with_v = split_witness(dist, x_names, z_name, alpha);

    // assemble (Y = X_W, V, W, Z)
    bool has_z = !z_name.empty();
    size_t zsize = has_z ? dist.sizes()[dist.var(z_name)] : 1;
    size_t ysize = 0;
    std::vector<size_t> xdims(m);
    for (size_t jx = 0; jx < m; ++jx) {
        xdims[jx] = with_v.var(x_names[jx]);
        ysize = std::max(ysize, with_v.sizes()[xdims[jx]]);
    }
    size_t vdim = with_v.var("V");
    size_t zdim = has_z ? with_v.var(z_name) : 0;

    std::vector<double> joint(ysize * m * m * zsize, 0.0);
    with_v.for_each([&](const std::vector<size_t>& idx, double p) {
        if (p <= 0) return;
        size_t z = has_z ? idx[zdim] : 0;
        size_t v = idx[vdim];
        for (size_t w = 0; w < m; ++w) {
            size_t y = idx[xdims[w]];
            joint[((y * m + v) * m + w) * zsize + z] += p * w_dist[w];
        }
    });
    JointDistribution ywvz({"Y", "V", "W", "Z"}, {ysize, m, m, zsize}, std::move(joint));

    auto [conditioned, pneq] =
        ywvz.condition([](const std::vector<size_t>& idx) { return idx[1] != idx[2]; });
    (void)pneq;
    rep.actual = hmin_smooth(conditioned, {"Y"}, {"V", "W", "Z"}, smooth2);
    rep.holds = rep.actual >= rep.bound - 1e-9;
    return rep;
}

} // namespace qid
