#include "bi3d/random.hpp"
#include "bi3d/simulator.hpp"
#include "bi3d/target_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

namespace bi3d::simulator {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Bi3D: return "bi3d";
        case Strategy::Random: return "random";
        case Strategy::Entropy: return "entropy";
        case Strategy::Committee: return "committee";
    }
    return "unknown";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "bi3d") return Strategy::Bi3D;
    if (s == "random") return Strategy::Random;
    if (s == "entropy") return Strategy::Entropy;
    if (s == "committee") return Strategy::Committee;
    throw DataError("unknown strategy '" + s + "'");
}

void BenchmarkConfig::validate() const {
    data.validate();
    proxy.validate();
    if (seeds.empty()) throw DataError("benchmark needs at least one seed");
    if (strategies.empty()) throw DataError("benchmark needs at least one strategy");
    if (budgets.empty()) throw DataError("benchmark needs at least one budget level");
    if (committee_heads < 2) throw DataError("committee needs at least two heads");
    for (const auto& b : budgets) {
        if (!(b.fraction > 0.0 && b.fraction <= 1.0)) throw DataError("budget fraction must lie in (0,1]");
        if (b.trigger_epochs.empty()) throw DataError("budget level needs at least one trigger epoch");
    }
}

double paired_permutation_p(std::span<const double> diffs, std::size_t samples, std::uint64_t seed) {
    const std::size_t n = diffs.size();
    if (n == 0) return 1.0;
    const double observed = std::accumulate(diffs.begin(), diffs.end(), 0.0);
    const double slack = 1e-12 * std::max(1.0, std::abs(observed));
    std::size_t extreme = 0;
    std::size_t total = 0;
    if (n <= 20) {
        const std::uint64_t patterns = std::uint64_t{1} << n;
        for (std::uint64_t mask = 0; mask < patterns; ++mask) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += ((mask >> i) & 1U) ? -diffs[i] : diffs[i];
            if (s >= observed - slack) ++extreme;
        }
        total = static_cast<std::size_t>(patterns);
    } else {
        Rng rng(seed);
        for (std::size_t t = 0; t < samples; ++t) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += (rng() >> 63) ? -diffs[i] : diffs[i];
            if (s >= observed - slack) ++extreme;
        }
        // Count the observed labelling itself.
        ++extreme;
        total = samples + 1;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

double mean_pairwise_cosine_distance(std::span<const std::vector<double>> vectors) {
    if (vectors.size() < 2) return 0.0;
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            total += 1.0 - target_sampler::cosine(vectors[i], vectors[j]);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

namespace {

std::unique_ptr<pipeline::TargetSelector> make_selector(Strategy s, const BenchmarkConfig& cfg,
                                                        const ProxyDetector& detector, std::uint64_t stream) {
    switch (s) {
        case Strategy::Bi3D:
            return std::make_unique<pipeline::DiversitySelector>(cfg.pipeline.banks, cfg.pipeline.entropy_base);
        case Strategy::Random: return std::make_unique<RandomSelector>(stream);
        case Strategy::Entropy: return std::make_unique<EntropySelector>();
        case Strategy::Committee:
            return std::make_unique<CommitteeSelector>(detector, stream, cfg.committee_head_epochs, cfg.committee_heads);
    }
    throw DataError("unknown strategy");
}

std::vector<std::string> strategy_labels(const std::vector<Strategy>& strategies) {
    std::map<Strategy, std::size_t> seen;
    std::vector<std::string> labels;
    for (auto s : strategies) {
        const std::size_t k = ++seen[s];
        labels.push_back(k == 1 ? to_string(s) : to_string(s) + "#" + std::to_string(k));
    }
    return labels;
}

} // namespace

BenchmarkReport benchmark(const BenchmarkConfig& cfg) {
    cfg.validate();
    BenchmarkReport report;
    const auto labels = strategy_labels(cfg.strategies);

    for (const std::uint64_t seed : cfg.seeds) {
        SyntheticConfig data_cfg = cfg.data;
        data_cfg.seed = derive_seed(seed, 0xDA7AULL);
        const SyntheticData data = generate(data_cfg);
        const std::size_t roi_dim = cfg.data.dims.roi_dim;
        std::map<std::string, const FrameRecord*> target_by_id;
        for (const auto& f : data.target) target_by_id[f.id] = &f;

        for (const auto& level : cfg.budgets) {
            const auto frames = static_cast<std::size_t>(
                std::llround(level.fraction * static_cast<double>(data.target.size())));
            const std::size_t budget = std::max(frames, level.trigger_epochs.size());
            const BudgetSchedule schedule = BudgetSchedule::equal_split(budget, level.trigger_epochs);

            for (std::size_t i = 0; i < cfg.strategies.size(); ++i) {
                const Strategy strategy = cfg.strategies[i];
                pipeline::PipelineConfig pcfg = cfg.pipeline;
                pcfg.schedule = schedule;
                pcfg.seed = derive_seed(seed, 0x5EEDULL);
                pcfg.total_epochs = std::max(pcfg.total_epochs, schedule.trigger_epochs.back() + 1);
                if (strategy != Strategy::Bi3D && !cfg.baselines_select_source) pcfg.source_mode.reset();

                ProxyConfig proxy_cfg = cfg.proxy;
                proxy_cfg.seed = derive_seed(seed, 0xD37ULL);
                ProxyDetector detector(proxy_cfg);
                auto selector = make_selector(strategy, cfg, detector, i);
                const auto run =
                    pipeline::run_pipeline(data.source, data.target, data.eval, detector, *selector, pcfg);

                std::vector<std::vector<double>> summaries;
                for (const auto& id : run.state.labeled_target) {
                    summaries.push_back(target_sampler::reweight(*target_by_id.at(id), roi_dim).vector);
                }

                BenchmarkRow row;
                row.strategy = labels[i];
                row.seed = seed;
                row.budget_fraction = level.fraction;
                row.budget_frames = budget;
                row.accuracy = run.report.final_accuracy.value_or(0.0);
                row.diversity = mean_pairwise_cosine_distance(summaries);
                row.labeled = run.state.labeled_target.size();
                row.selected_source = run.state.selected_source.size();
                report.rows.push_back(std::move(row));
            }
        }
    }

    // Aggregate per (strategy, budget) in configuration order.
    const std::string reference = "random";
    for (const auto& level : cfg.budgets) {
        std::map<std::uint64_t, double> random_acc;
        for (const auto& r : report.rows) {
            if (r.strategy == reference && r.budget_fraction == level.fraction) random_acc[r.seed] = r.accuracy;
        }
        for (const auto& label : labels) {
            SummaryRow s;
            s.strategy = label;
            s.budget_fraction = level.fraction;
            std::vector<double> acc;
            std::vector<double> diffs;
            double diversity = 0.0;
            for (const auto& r : report.rows) {
                if (r.strategy != label || r.budget_fraction != level.fraction) continue;
                s.budget_frames = r.budget_frames;
                acc.push_back(r.accuracy);
                diversity += r.diversity;
                if (const auto it = random_acc.find(r.seed); it != random_acc.end()) diffs.push_back(r.accuracy - it->second);
            }
            s.runs = acc.size();
            if (!acc.empty()) {
                s.mean_accuracy = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
                s.mean_diversity = diversity / static_cast<double>(acc.size());
                if (acc.size() > 1) {
                    double ss = 0.0;
                    for (double a : acc) ss += (a - s.mean_accuracy) * (a - s.mean_accuracy);
                    s.std_accuracy = std::sqrt(ss / static_cast<double>(acc.size() - 1));
                }
            }
            if (label != reference && !diffs.empty()) {
                s.mean_diff_vs_random = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(diffs.size());
                s.p_value_vs_random = paired_permutation_p(diffs, 200000, derive_seed(cfg.seeds.front(), 0x9E7ULL));
            }
            report.summary.push_back(std::move(s));
        }
    }
    return report;
}

} // namespace bi3d::simulator
