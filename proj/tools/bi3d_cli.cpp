// bi3d: command-line front end.
//
//   gen            synthetic source/target/eval frame files
//   train-disc     fit the domain discriminator on two frame files
//   sample-source  rank source frames by domainness and select a subset
//   sample-target  one diversity-aware target round
//   run            full pipeline with the proxy detector
//   bench          seeded strategy comparison
//   report         human-readable summary of a run or bench report
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.

#include "bi3d/io.hpp"
#include "bi3d/pipeline.hpp"
#include "bi3d/random.hpp"
#include "bi3d/simulator.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using bi3d::io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
    cmd->add_option("--seed", c.seed, "Random seed (overrides the config)");
    cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    auto* out = cmd->add_option("--out", c.out, "Output path");
    if (out_required) out->required();
}

bi3d::scoring::EntropyBase parse_base(const std::string& s) {
    if (s == "bits") return bi3d::scoring::EntropyBase::Bits;
    if (s == "nats") return bi3d::scoring::EntropyBase::Nats;
    throw UsageError("--entropy-base must be 'bits' or 'nats'");
}

bi3d::pipeline::PipelineConfig pipeline_config(const Common& c, bool require_schedule) {
    bi3d::pipeline::PipelineConfig cfg;
    if (!c.config.empty()) {
        try {
            cfg = bi3d::io::pipeline_config_from_json(bi3d::io::read_json(c.config), require_schedule);
        } catch (const bi3d::DataError& e) {
            throw bi3d::DataError(c.config + ": " + e.what());
        }
    }
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

std::vector<bi3d::scoring::SceneVector> scene_vectors(std::span<const bi3d::FrameRecord> frames,
                                                      bi3d::scoring::EntropyBase base) {
    std::vector<bi3d::scoring::SceneVector> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(bi3d::scoring::scene_vector(f, base));
    return out;
}

void require_domain(std::span<const bi3d::FrameRecord> frames, bi3d::Domain d, const std::string& what) {
    for (const auto& f : frames) {
        if (f.domain != d) throw bi3d::DataError(what + " frame '" + f.id + "' is tagged " + to_string(f.domain));
    }
}

json scores_json(std::span<const bi3d::Score> scores) {
    json arr = json::array();
    for (const auto& s : scores) arr.push_back(json::array({s.frame_id, s.value}));
    return arr;
}

// Labels from an offline annotation file (id<TAB>label per line), falling back
// to labels shipped with the frames.
class FileAnnotator final : public bi3d::pipeline::Annotator {
public:
    explicit FileAnnotator(std::map<std::string, std::string> labels) : labels_(std::move(labels)) {}

    std::optional<std::string> annotate(const bi3d::FrameRecord& frame) const override {
        if (const auto it = labels_.find(frame.id); it != labels_.end()) return it->second;
        return fallback_.annotate(frame);
    }

private:
    std::map<std::string, std::string> labels_;
    bi3d::pipeline::HiddenLabelAnnotator fallback_;
};

std::map<std::string, std::string> read_labels(const std::string& path) {
    std::istringstream in(bi3d::io::read_text(path));
    std::map<std::string, std::string> labels;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw bi3d::DataError(path + ": line " + std::to_string(n) + ": expected 'id<TAB>label'");
        }
        labels[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return labels;
}

void print_summary_table(const json& report, std::ostream& os) {
    os << std::left << std::setw(14) << "strategy" << std::setw(10) << "budget" << std::setw(8) << "runs"
       << std::setw(12) << "accuracy" << std::setw(10) << "std" << std::setw(11) << "diversity" << std::setw(12)
       << "diff_rand" << "p_rand\n";
    os << std::fixed;
    for (const auto& s : report.at("summary")) {
        os << std::setw(14) << s.at("strategy").get<std::string>() << std::setw(10)
           << s.at("budget_frames").get<std::size_t>() << std::setw(8) << s.at("runs").get<std::size_t>()
           << std::setprecision(4) << std::setw(12) << s.at("mean_accuracy").get<double>() << std::setw(10)
           << s.at("std_accuracy").get<double>() << std::setw(11) << s.at("mean_diversity").get<double>();
        const auto& d = s.at("mean_diff_vs_random");
        const auto& p = s.at("p_value_vs_random");
        os << std::setw(12) << (d.is_null() ? std::string("-") : std::to_string(d.get<double>()));
        os << (p.is_null() ? std::string("-") : std::to_string(p.get<double>())) << "\n";
    }
}

void print_run(const json& report, std::ostream& os) {
    os << "strategy " << report.at("strategy").get<std::string>() << ", seed " << report.at("seed").get<std::uint64_t>()
       << "\n";
    const auto& stages = report.at("stages");
    const auto& disc = stages.at("discriminator");
    os << "detector frozen during discriminator training: "
       << (disc.at("detector_before") == disc.at("detector_after") ? "yes" : "no") << "\n";
    if (!disc.at("loss").empty()) {
        os << "discriminator loss: " << disc.at("loss").front().get<double>() << " -> "
           << disc.at("loss").back().get<double>() << " over " << disc.at("loss").size() << " epochs\n";
    }
    os << "selected source frames: " << stages.at("source_selection").at("selected").size() << "\n";
    for (const auto& r : report.at("rounds")) {
        os << "round " << r.at("round").get<std::size_t>() << " (epoch " << r.at("epoch").get<std::size_t>()
           << "): " << r.at("selected").size() << "/" << r.at("budget").get<std::size_t>() << " frames, "
           << r.at("labeled_total").get<std::size_t>() << " labelled in total\n";
    }
    const auto print_acc = [&](const char* name, const json& v) {
        os << name << ": " << (v.is_null() ? std::string("n/a") : std::to_string(v.get<double>())) << "\n";
    };
    print_acc("accuracy after pretraining", stages.at("pretrain").at("accuracy"));
    print_acc("accuracy after source fine-tuning", stages.at("source_selection").at("accuracy_after"));
    print_acc("final accuracy", report.at("final_accuracy"));
    for (const auto& w : report.at("warnings")) os << "warning: " << w.get<std::string>() << "\n";
    if (report.at("halted").get<bool>()) {
        os << "halted: " << report.at("manifest").size() << " frames await annotation\n";
    }
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        bi3d::io::write_text(out, text);
    }
}

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw bi3d::NumericalError(std::string("non-finite value in ") + what);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bi-domain active learning toolkit"};
    app.require_subcommand(1);

    // gen
    Common gen_c;
    std::optional<std::size_t> n_source, n_target, n_eval, clusters;
    std::optional<double> shift, noise, imbalance;
    bool unlabeled_target = false;
    auto* gen = app.add_subcommand("gen", "Generate synthetic frame files");
    add_common(gen, gen_c, true);
    gen->add_option("--n-source", n_source, "Source frames");
    gen->add_option("--n-target", n_target, "Unlabelled target frames");
    gen->add_option("--n-eval", n_eval, "Held-out target frames");
    gen->add_option("--clusters", clusters, "Clusters per domain");
    gen->add_option("--domain-shift", shift, "Centroid displacement between domains");
    gen->add_option("--label-noise", noise, "Probability of a wrong hidden label");
    gen->add_option("--imbalance", imbalance, "Zipf exponent of cluster frequencies");
    gen->add_flag("--unlabeled-target", unlabeled_target, "Drop hidden labels from the target pool");

    // train-disc
    Common td_c;
    std::string td_source, td_target, td_base = "bits";
    std::optional<std::size_t> td_epochs, td_batch;
    std::optional<double> td_lr, td_l2;
    auto* td = app.add_subcommand("train-disc", "Train the domain discriminator");
    add_common(td, td_c, true);
    td->add_option("--source", td_source, "Source frame file")->required()->check(CLI::ExistingFile);
    td->add_option("--target", td_target, "Target frame file")->required()->check(CLI::ExistingFile);
    td->add_option("--epochs", td_epochs, "Training epochs");
    td->add_option("--batch-size", td_batch, "Mini-batch size");
    td->add_option("--learning-rate", td_lr, "Learning rate");
    td->add_option("--l2", td_l2, "Weight decay");
    td->add_option("--entropy-base", td_base, "bits or nats");

    // sample-source
    Common ss_c;
    std::string ss_source, ss_model, ss_mode, ss_scores, ss_base = "bits";
    auto* ss = app.add_subcommand("sample-source", "Select target-like source frames");
    add_common(ss, ss_c, true);
    ss->add_option("--source", ss_source, "Source frame file")->required()->check(CLI::ExistingFile);
    ss->add_option("--model", ss_model, "Discriminator checkpoint")->required()->check(CLI::ExistingFile);
    ss->add_option("--mode", ss_mode, "threshold:<logit> | proportion:<fraction> | topk:<k>");
    ss->add_option("--scores", ss_scores, "Write per-frame domainness to this JSON file");
    ss->add_option("--entropy-base", ss_base, "bits or nats");

    // sample-target
    Common st_c;
    std::string st_target, st_model, st_labeled, st_scores, st_criterion, st_base = "bits";
    std::size_t st_budget = 0;
    bool st_update = false;
    auto* st = app.add_subcommand("sample-target", "Pick one round of target frames for annotation");
    add_common(st, st_c, true);
    st->add_option("--target", st_target, "Target frame file")->required()->check(CLI::ExistingFile);
    st->add_option("--model", st_model, "Discriminator checkpoint")->required()->check(CLI::ExistingFile);
    st->add_option("--budget", st_budget, "Frames to select (b_k)")->required();
    st->add_option("--labeled", st_labeled, "Manifest of already-labelled target ids")->check(CLI::ExistingFile);
    st->add_option("--scores", st_scores, "Write scores and banks to this JSON file");
    st->add_option("--merge-criterion", st_criterion, "min-pairwise or max-pairwise");
    st->add_flag("--update-prototype-on-join", st_update, "Refresh prototypes when frames join a bank");
    st->add_option("--entropy-base", st_base, "bits or nats");

    // run
    Common run_c;
    std::string run_source, run_target, run_eval, run_strategy = "bi3d", run_schedule, run_labels, run_manifest,
                                                   run_state, run_proxy;
    std::optional<std::size_t> run_classes;
    auto* run = app.add_subcommand("run", "Run the full pipeline with the proxy detector");
    add_common(run, run_c, true);
    run->add_option("--source", run_source, "Labelled source frame file")->required()->check(CLI::ExistingFile);
    run->add_option("--target", run_target, "Unlabelled target frame file")->required()->check(CLI::ExistingFile);
    run->add_option("--eval", run_eval, "Held-out target frame file")->check(CLI::ExistingFile);
    run->add_option("--strategy", run_strategy, "bi3d, random, entropy or committee");
    run->add_option("--schedule", run_schedule, "Schedule preset, e.g. kitti-1%");
    run->add_option("--labels", run_labels, "Offline annotations, id<TAB>label per line")->check(CLI::ExistingFile);
    run->add_option("--manifest", run_manifest, "Where to write ids awaiting annotation if the run halts");
    run->add_option("--state", run_state, "Write the final pipeline state to this JSON file");
    run->add_option("--proxy-config", run_proxy, "Proxy detector JSON config")->check(CLI::ExistingFile);
    run->add_option("--classes", run_classes, "Proxy detector classes (default: inferred from source labels)");

    // bench
    Common bench_c;
    std::optional<std::size_t> bench_seeds;
    std::vector<std::string> bench_strategies;
    auto* bench = app.add_subcommand("bench", "Seeded comparison of sampling strategies");
    add_common(bench, bench_c, true);
    bench->add_option("--seeds", bench_seeds, "Number of seeds, starting at --seed (default 0)");
    bench->add_option("--strategies", bench_strategies, "Subset of bi3d random entropy committee");

    // report
    Common rep_c;
    std::string rep_in;
    auto* rep = app.add_subcommand("report", "Summarise a run or bench report");
    add_common(rep, rep_c, false);
    rep->add_option("--in", rep_in, "Report JSON written by run or bench")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            bi3d::simulator::SyntheticConfig cfg;
            if (!gen_c.config.empty()) cfg = bi3d::io::load_synthetic_config(gen_c.config);
            if (n_source) cfg.n_source = *n_source;
            if (n_target) cfg.n_target = *n_target;
            if (n_eval) cfg.n_eval = *n_eval;
            if (clusters) cfg.clusters_per_domain = *clusters;
            if (shift) cfg.domain_shift = *shift;
            if (noise) cfg.label_noise = *noise;
            if (imbalance) cfg.imbalance = *imbalance;
            if (gen_c.seed) cfg.seed = *gen_c.seed;
            auto data = bi3d::simulator::generate(cfg);
            if (unlabeled_target) {
                for (auto& f : data.target) f.hidden_label = bi3d::HiddenLabel{};
            }
            const fs::path dir = gen_c.out;
            fs::create_directories(dir);
            bi3d::io::save_frames(dir / "source.ndjson", data.source);
            bi3d::io::save_frames(dir / "target.ndjson", data.target);
            bi3d::io::save_frames(dir / "eval.ndjson", data.eval);
            bi3d::io::write_text(dir / "synthetic.json", bi3d::io::dump(bi3d::io::to_json(cfg)));
            std::cout << "wrote " << data.source.size() << " source, " << data.target.size() << " target, "
                      << data.eval.size() << " eval frames to " << dir.string() << "\n";
        } else if (td->parsed()) {
            auto cfg = pipeline_config(td_c, false);
            if (td_epochs) cfg.discriminator.epochs = *td_epochs;
            if (td_batch) cfg.discriminator.batch_size = *td_batch;
            if (td_lr) cfg.discriminator.learning_rate = *td_lr;
            if (td_l2) cfg.discriminator.l2 = *td_l2;
            if (td_c.seed) cfg.discriminator.seed = *td_c.seed;
            cfg.discriminator.validate();
            const auto base = td->count("--entropy-base") ? parse_base(td_base) : cfg.entropy_base;
            const auto source = bi3d::io::load_frames(td_source);
            const auto target = bi3d::io::load_frames(td_target);
            if (source.empty() || target.empty()) throw bi3d::DataError("both frame files must be non-empty");
            require_domain(source, bi3d::Domain::Source, "source");
            require_domain(target, bi3d::Domain::Target, "target");
            const auto src_vs = scene_vectors(source, base);
            const auto tgt_vs = scene_vectors(target, base);
            std::vector<std::size_t> dims{src_vs.front().values.size()};
            dims.insert(dims.end(), cfg.discriminator_hidden.begin(), cfg.discriminator_hidden.end());
            dims.push_back(1);
            bi3d::DiscriminatorModel init(dims, cfg.discriminator_leak, bi3d::derive_seed(cfg.discriminator.seed, 1));
            const auto result = bi3d::train(init, src_vs, tgt_vs, cfg.discriminator);
            check_finite(result.loss_history, "discriminator loss");
            bi3d::io::save_model(td_c.out, result.model);
            std::vector<double> scores;
            std::vector<int> labels;
            for (const auto& v : src_vs) {
                scores.push_back(result.model.forward(v));
                labels.push_back(0);
            }
            for (const auto& v : tgt_vs) {
                scores.push_back(result.model.forward(v));
                labels.push_back(1);
            }
            std::cout << "epochs " << result.loss_history.size() << ", final loss "
                      << (result.loss_history.empty() ? std::nan("") : result.loss_history.back())
                      << ", training AUC " << bi3d::roc_auc(scores, labels) << "\n";
        } else if (ss->parsed()) {
            auto cfg = pipeline_config(ss_c, false);
            if (!ss_mode.empty()) cfg.source_mode = bi3d::source_sampler::parse_mode(ss_mode);
            if (!cfg.source_mode) throw UsageError("sample-source needs a selection mode");
            const auto base = ss->count("--entropy-base") ? parse_base(ss_base) : cfg.entropy_base;
            const auto source = bi3d::io::load_frames(ss_source);
            const auto model = bi3d::io::load_model(ss_model);
            const auto scores = bi3d::source_sampler::score_source(source, model, base);
            const auto selected = bi3d::source_sampler::select_source(scores, *cfg.source_mode);
            bi3d::io::write_manifest(ss_c.out, selected);
            if (!ss_scores.empty()) {
                json j{{"mode", bi3d::source_sampler::describe(*cfg.source_mode)},
                       {"ranking", scores_json(bi3d::source_sampler::rank(scores))},
                       {"selected", selected}};
                bi3d::io::write_text(ss_scores, bi3d::io::dump(j));
            }
            std::cout << "selected " << selected.size() << " of " << source.size() << " source frames ("
                      << bi3d::source_sampler::describe(*cfg.source_mode) << ")\n";
        } else if (st->parsed()) {
            auto cfg = pipeline_config(st_c, false);
            if (!st_criterion.empty()) {
                if (st_criterion == "min-pairwise") {
                    cfg.banks.criterion = bi3d::target_sampler::MergeCriterion::MinPairwise;
                } else if (st_criterion == "max-pairwise") {
                    cfg.banks.criterion = bi3d::target_sampler::MergeCriterion::MaxPairwise;
                } else {
                    throw UsageError("--merge-criterion must be min-pairwise or max-pairwise");
                }
            }
            if (st_update) cfg.banks.update_prototype_on_join = true;
            const auto base = st->count("--entropy-base") ? parse_base(st_base) : cfg.entropy_base;
            const auto target = bi3d::io::load_frames(st_target);
            const auto model = bi3d::io::load_model(st_model);
            std::set<std::string> labeled;
            if (!st_labeled.empty()) {
                for (auto& id : bi3d::io::read_manifest(st_labeled)) labeled.insert(id);
            }
            std::vector<bi3d::FrameRecord> pool;
            for (const auto& f : target) {
                if (!labeled.count(f.id)) pool.push_back(f);
            }
            const auto round = bi3d::target_sampler::sample_round(pool, model, st_budget, cfg.banks, base);
            bi3d::io::write_manifest(st_c.out, round.selected);
            if (!st_scores.empty()) {
                json banks = json::array();
                for (const auto& b : round.banks.banks) banks.push_back(b.members);
                json j{{"budget", st_budget},
                       {"selected", round.selected},
                       {"domainness", scores_json(round.scores)},
                       {"banks", banks}};
                bi3d::io::write_text(st_scores, bi3d::io::dump(j));
            }
            std::cout << "selected " << round.selected.size() << " of " << pool.size() << " unlabelled target frames\n";
        } else if (run->parsed()) {
            auto cfg = pipeline_config(run_c, run_schedule.empty());
            if (!run_schedule.empty()) cfg.schedule = bi3d::pipeline::preset_schedule(run_schedule);
            cfg.validate();
            const auto source = bi3d::io::load_frames(run_source);
            const auto target = bi3d::io::load_frames(run_target);
            std::vector<bi3d::FrameRecord> eval;
            if (!run_eval.empty()) eval = bi3d::io::load_frames(run_eval);

            FileAnnotator annotator(run_labels.empty() ? std::map<std::string, std::string>{} : read_labels(run_labels));
            bi3d::simulator::ProxyConfig proxy;
            if (!run_proxy.empty()) proxy = bi3d::io::proxy_config_from_json(bi3d::io::read_json(run_proxy));
            if (run_classes) {
                proxy.classes = *run_classes;
            } else if (run_proxy.empty()) {
                std::size_t classes = 0;
                for (const auto& f : source) {
                    if (const auto label = annotator.annotate(f)) {
                        try {
                            classes = std::max<std::size_t>(classes, std::stoul(*label) + 1);
                        } catch (const std::logic_error&) {
                            throw bi3d::DataError("source label '" + *label + "' is not a class index");
                        }
                    }
                }
                proxy.classes = std::max<std::size_t>(classes, 2);
            }
            proxy.seed = bi3d::derive_seed(cfg.seed, 0xD37ULL);
            bi3d::simulator::ProxyDetector detector(proxy);

            const auto strategy = bi3d::simulator::strategy_from_string(run_strategy);
            std::unique_ptr<bi3d::pipeline::TargetSelector> selector;
            switch (strategy) {
                case bi3d::simulator::Strategy::Bi3D:
                    selector = std::make_unique<bi3d::pipeline::DiversitySelector>(cfg.banks, cfg.entropy_base);
                    break;
                case bi3d::simulator::Strategy::Random:
                    selector = std::make_unique<bi3d::simulator::RandomSelector>();
                    break;
                case bi3d::simulator::Strategy::Entropy:
                    selector = std::make_unique<bi3d::simulator::EntropySelector>();
                    break;
                case bi3d::simulator::Strategy::Committee:
                    selector = std::make_unique<bi3d::simulator::CommitteeSelector>(detector);
                    break;
            }
            const auto result = bi3d::pipeline::run_pipeline(source, target, eval, detector, *selector, cfg, annotator);
            check_finite(result.report.discriminator_loss, "discriminator loss");
            check_finite(result.report.epoch_accuracy, "accuracy");
            bi3d::io::write_text(run_c.out, bi3d::io::dump(bi3d::io::to_json(result.report, cfg)));
            if (!run_state.empty()) bi3d::io::write_text(run_state, bi3d::io::dump(bi3d::io::to_json(result.state)));
            if (result.report.halted) {
                const std::string path = run_manifest.empty() ? run_c.out + ".manifest.txt" : run_manifest;
                bi3d::io::write_manifest(path, result.report.manifest);
                std::cout << "halted: " << result.report.manifest.size() << " frames need labels, listed in " << path
                          << "\n";
            }
            print_run(bi3d::io::to_json(result.report, cfg), std::cout);
        } else if (bench->parsed()) {
            json j = bench_c.config.empty() ? json::object() : bi3d::io::read_json(bench_c.config);
            if (!j.is_object()) throw bi3d::DataError(bench_c.config + ": expected a JSON object");
            if (bench_seeds || bench_c.seed || (!j.contains("seeds") && !j.contains("num_seeds"))) {
                const std::uint64_t first = bench_c.seed.value_or(0);
                const std::size_t n = bench_seeds.value_or(j.contains("num_seeds") ? j["num_seeds"].get<std::size_t>() : 5);
                j.erase("num_seeds");
                json seeds = json::array();
                for (std::size_t i = 0; i < n; ++i) seeds.push_back(first + i);
                j["seeds"] = seeds;
            }
            if (!bench_strategies.empty()) j["strategies"] = bench_strategies;
            bi3d::simulator::BenchmarkConfig cfg;
            try {
                cfg = bi3d::io::benchmark_config_from_json(j);
            } catch (const bi3d::DataError& e) {
                throw bi3d::DataError((bench_c.config.empty() ? std::string("bench") : bench_c.config) + ": " + e.what());
            }
            const auto report = bi3d::simulator::benchmark(cfg);
            for (const auto& r : report.rows) {
                if (!std::isfinite(r.accuracy) || !std::isfinite(r.diversity)) {
                    throw bi3d::NumericalError("non-finite metric in benchmark row " + r.strategy);
                }
            }
            const fs::path dir = bench_c.out;
            fs::create_directories(dir);
            json full = bi3d::io::to_json(report);
            full["config"] = bi3d::io::to_json(cfg);
            bi3d::io::write_text(dir / "bench.json", bi3d::io::dump(full));
            bi3d::io::write_text(dir / "bench.csv", bi3d::io::benchmark_csv(report));
            bi3d::io::write_text(dir / "bench_plot.tsv", bi3d::io::benchmark_plot_data(report));
            print_summary_table(full, std::cout);
        } else if (rep->parsed()) {
            const json j = bi3d::io::read_json(rep_in);
            std::ostringstream os;
            try {
                if (j.contains("summary")) {
                    print_summary_table(j, os);
                } else if (j.contains("stages")) {
                    print_run(j, os);
                } else {
                    throw bi3d::DataError(rep_in + ": neither a run nor a bench report");
                }
            } catch (const json::exception& e) {
                throw bi3d::DataError(rep_in + ": " + e.what());
            }
            emit(rep_c.out, os.str());
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const bi3d::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const bi3d::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
