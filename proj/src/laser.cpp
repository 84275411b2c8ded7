#include "lprel/laser.hpp"

#include <algorithm>

#include "lprel/error.hpp"
#include "lprel/numeric.hpp"

namespace lprel {

namespace {
constexpr std::uint64_t kProposalBudget = 10'000'000;
constexpr double kMinAcceptanceRate = 1e-4;
}  // namespace

double max_relevance(const RelevanceModel& model, const Eigen::VectorXd& x0) {
    const Eigen::VectorXd lp = model.coefficients_at(x0);
    if (lp.isZero(0.0)) return 1.0;
    const double n = static_cast<double>(model.z_basis().sample_size());
    const Eigen::VectorXd grid = linspace(0.5 / n, 1.0 - 0.5 / n, 1001);
    double best = 0.0;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        best = std::max(best, model.density_floored(lp, grid[i]));
    const Eigen::VectorXd& ranks = model.z_basis().rank_probs();
    for (Eigen::Index i = 0; i < ranks.size(); ++i)
        best = std::max(best, model.density_floored(lp, ranks[i]));
    return best;
}

LaserSample generate_laser(const Dataset& data, const RelevanceModel& model,
                           const Eigen::VectorXd& x0, Eigen::Index n_out,
                           RngStream rng) {
    if (n_out < 1) throw data_error("generate_laser: need n >= 1");
    if (model.z_basis().sample_size() != data.n())
        throw data_error("generate_laser: model was not fitted on this dataset");

    LaserSample out;
    out.x0 = x0;
    out.seed = rng.master_seed();

    const Eigen::VectorXd lp = model.coefficients_at(x0);
    if (model.flat() || lp.isZero(0.0)) {
        out.flat = true;
        out.samples = data.z;
        out.proposals = 0;
        out.acceptance_rate = 1.0;
        return out;
    }

    // Proposals are drawn from a sorted copy so results depend only on the
    // z multiset, not on row order; weights are precomputed per rank.
    const Eigen::Index n = data.n();
    Eigen::VectorXd sorted = data.z;
    std::sort(sorted.data(), sorted.data() + n);
    const Eigen::VectorXd ranks = empirical_cdf(sorted);
    Eigen::VectorXd weight(n);
    for (Eigen::Index i = 0; i < n; ++i)
        weight[i] = model.density_floored(lp, ranks[i]);

    const double max_d = max_relevance(model, x0);
    if (!(max_d > 0.0))
        throw numeric_error("generate_laser: relevance maximum is not positive");

    out.samples.resize(n_out);
    Eigen::Index accepted = 0;
    std::uint64_t proposals = 0;
    while (accepted < n_out) {
        if (proposals >= kProposalBudget) {
            const double rate = static_cast<double>(accepted) / static_cast<double>(proposals);
            throw numeric_error("generate_laser: acceptance rate " + format_double(rate) +
                                " after " + std::to_string(proposals) +
                                " proposals; relevance density is pathological");
        }
        const auto idx = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
        const double u = rng.uniform();
        ++proposals;
        if (weight[idx] > u * max_d) {
            out.samples[accepted++] = sorted[idx];
        }
        if (proposals == kProposalBudget / 10 &&
            static_cast<double>(accepted) < kMinAcceptanceRate * static_cast<double>(proposals)) {
            throw numeric_error("generate_laser: acceptance rate below 1e-4; "
                                "relevance density is pathological");
        }
    }
    out.proposals = proposals;
    out.acceptance_rate = static_cast<double>(n_out) / static_cast<double>(proposals);
    return out;
}

}  // namespace lprel
