#include "bi3d/pipeline.hpp"

#include "bi3d/label_access.hpp"
#include "bi3d/random.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <set>
#include <unordered_map>

namespace bi3d::pipeline {

std::string DetectorState::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double p : parameters) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &p, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::optional<std::string> HiddenLabelAnnotator::annotate(const FrameRecord& frame) const {
    return LabelAccess::reveal(frame);
}

Selection DiversitySelector::select(std::span<const FrameRecord> unlabeled, const RoundContext& ctx) {
    if (!ctx.discriminator) throw DataError("diversity selector needs a trained discriminator");
    auto round = target_sampler::sample_round(unlabeled, *ctx.discriminator, ctx.budget, options_, base_);
    return Selection{std::move(round.selected), std::move(round.scores)};
}

void PipelineConfig::validate() const {
    schedule.validate();
    if (source_mode) source_sampler::validate(*source_mode);
    discriminator.validate();
    if (discriminator_hidden.empty()) throw DataError("discriminator needs at least one hidden layer");
    for (auto h : discriminator_hidden) {
        if (h == 0) throw DataError("discriminator hidden layer of width 0");
    }
    if (!(discriminator_leak > 0.0 && discriminator_leak < 1.0)) throw DataError("leaky slope must lie in (0,1)");
    if (source_finetune_epochs == 0) throw DataError("source_finetune_epochs must be positive");
    if (schedule.rounds() > 0 && total_epochs <= schedule.trigger_epochs.back()) {
        throw DataError("total_epochs must exceed the last trigger epoch");
    }
}

PipelineState update_labeled_pool(const PipelineState& state, std::span<const std::string> delta) {
    std::set<std::string> labeled(state.labeled_target.begin(), state.labeled_target.end());
    std::set<std::string> source(state.selected_source.begin(), state.selected_source.end());
    std::set<std::string> seen;
    for (const auto& id : delta) {
        if (labeled.count(id)) throw DataError("frame '" + id + "' is already labelled");
        if (source.count(id)) throw DataError("frame '" + id + "' belongs to the selected source set");
        if (!seen.insert(id).second) throw DataError("frame '" + id + "' appears twice in one labelling round");
    }
    PipelineState next = state;
    next.labeled_target.insert(next.labeled_target.end(), delta.begin(), delta.end());
    next.round += 1;
    return next;
}

namespace {

std::vector<FrameRecord> featurize(const DetectorOracle& oracle, const DetectorState& state,
                                   std::span<const FrameRecord* const> frames) {
    std::vector<FrameRecord> out;
    out.reserve(frames.size());
    for (const FrameRecord* f : frames) out.push_back(oracle.features(state, *f));
    return out;
}

std::optional<double> maybe_evaluate(const DetectorOracle& oracle, const DetectorState& state,
                                     std::span<const FrameRecord> eval) {
    if (eval.empty()) return std::nullopt;
    return oracle.evaluate(state, eval);
}

} // namespace

RunResult run_pipeline(std::span<const FrameRecord> source, std::span<const FrameRecord> target,
                       std::span<const FrameRecord> eval, DetectorOracle& oracle, TargetSelector& selector,
                       const PipelineConfig& cfg, const Annotator& annotator) {
    cfg.validate();
    if (source.empty() || target.empty()) throw DataError("pipeline needs non-empty source and target domains");

    RunResult result;
    RunReport& report = result.report;
    report.strategy = selector.name();
    report.seed = cfg.seed;
    result.state.rng_seed = cfg.seed;

    const auto source_sorted = sorted_by_id(source);
    const auto target_sorted = sorted_by_id(target);
    for (std::size_t i = 1; i < target_sorted.size(); ++i) {
        if (target_sorted[i]->id == target_sorted[i - 1]->id) throw DataError("duplicate target id '" + target_sorted[i]->id + "'");
    }

    // Source labels are part of the problem statement (labelled source domain).
    std::unordered_map<std::string, std::string> labels;
    std::vector<LabeledFrame> source_labeled;
    for (const FrameRecord* f : source_sorted) {
        if (f->domain != Domain::Source) throw DataError("frame '" + f->id + "' in the source set is target-tagged");
        auto label = annotator.annotate(*f);
        if (!label) throw DataError("source frame '" + f->id + "' has no label");
        labels[f->id] = *label;
        source_labeled.push_back(LabeledFrame{f, *label});
    }
    for (const FrameRecord* f : target_sorted) {
        if (f->domain != Domain::Target) throw DataError("frame '" + f->id + "' in the target set is source-tagged");
    }

    // Stage 1: pre-train on the source domain.
    DetectorState detector = oracle.pretrain(source_labeled);
    report.accuracy_pretrained = maybe_evaluate(oracle, detector, eval);

    // Stage 2: domain discriminator on frozen detector features.
    report.detector_before_discriminator = detector.fingerprint();
    const bool want_discriminator = cfg.source_mode.has_value() || selector.needs_discriminator();
    if (want_discriminator) {
        const auto src_feat = featurize(oracle, detector, source_sorted);
        const auto tgt_feat = featurize(oracle, detector, target_sorted);
        std::vector<scoring::SceneVector> src_vs;
        std::vector<scoring::SceneVector> tgt_vs;
        for (const auto& f : src_feat) src_vs.push_back(scoring::scene_vector(f, cfg.entropy_base));
        for (const auto& f : tgt_feat) tgt_vs.push_back(scoring::scene_vector(f, cfg.entropy_base));

        std::vector<std::size_t> dims{src_vs.front().values.size()};
        dims.insert(dims.end(), cfg.discriminator_hidden.begin(), cfg.discriminator_hidden.end());
        dims.push_back(1);
        DiscriminatorModel init(dims, cfg.discriminator_leak, derive_seed(cfg.seed, 1));
        TrainConfig tc = cfg.discriminator;
        tc.seed = derive_seed(cfg.discriminator.seed, cfg.seed);
        auto trained = train(init, src_vs, tgt_vs, tc);
        report.discriminator_loss = trained.loss_history;
        result.discriminator = std::move(trained.model);

        // Stage 3a: domainness-aware source selection.
        if (cfg.source_mode) {
            report.source_scores = source_sampler::score_source(src_feat, *result.discriminator, cfg.entropy_base);
            result.state.selected_source = source_sampler::select_source(report.source_scores, *cfg.source_mode);
        }
    }
    report.detector_after_discriminator = detector.fingerprint();
    if (!cfg.source_mode) {
        for (const FrameRecord* f : source_sorted) result.state.selected_source.push_back(f->id);
    }
    report.selected_source = result.state.selected_source;

    std::map<std::string, const FrameRecord*> by_id;
    for (const FrameRecord* f : source_sorted) by_id[f->id] = f;
    for (const FrameRecord* f : target_sorted) {
        if (!by_id.emplace(f->id, f).second) throw DataError("frame id '" + f->id + "' used in both domains");
    }

    std::vector<LabeledFrame> training_set;
    for (const auto& id : result.state.selected_source) training_set.push_back(LabeledFrame{by_id.at(id), labels.at(id)});

    // Stage 3b: fine-tune on the selected source frames.
    detector = oracle.finetune(detector, training_set, cfg.source_finetune_epochs);
    report.accuracy_after_source = maybe_evaluate(oracle, detector, eval);

    // Stage 4: target rounds.
    if (cfg.schedule.rounds() > 0) {
        std::vector<std::size_t> budgets = cfg.schedule.per_round;
        if (cfg.schedule.total_budget() > target_sorted.size()) {
            report.warnings.push_back("annotation budget " + std::to_string(cfg.schedule.total_budget()) +
                                      " exceeds the " + std::to_string(target_sorted.size()) +
                                      " target frames; clipped");
            std::size_t remaining = target_sorted.size();
            for (auto& b : budgets) {
                b = std::min(b, remaining);
                remaining -= b;
            }
        }

        std::set<std::string> labeled_ids;
        std::vector<FrameRecord> frozen_features;
        if (!cfg.rescore_each_round) frozen_features = featurize(oracle, detector, target_sorted);

        std::size_t next_round = 0;
        for (std::size_t epoch = 0; epoch < cfg.total_epochs; ++epoch) {
            if (next_round < budgets.size() && cfg.schedule.trigger_epochs[next_round] == epoch) {
                const std::size_t k = next_round++;
                std::vector<FrameRecord> unlabeled;
                if (cfg.rescore_each_round) {
                    std::vector<const FrameRecord*> pool;
                    for (const FrameRecord* f : target_sorted) {
                        if (!labeled_ids.count(f->id)) pool.push_back(f);
                    }
                    unlabeled = featurize(oracle, detector, pool);
                } else {
                    for (const auto& f : frozen_features) {
                        if (!labeled_ids.count(f.id)) unlabeled.push_back(f);
                    }
                }

                RoundContext ctx;
                ctx.round = k;
                ctx.budget = budgets[k];
                ctx.seed = derive_seed(cfg.seed, 1000 + k);
                ctx.oracle = &oracle;
                ctx.detector = &detector;
                ctx.discriminator = result.discriminator ? &*result.discriminator : nullptr;
                ctx.labeled = training_set;

                Selection sel;
                if (ctx.budget > 0 && !unlabeled.empty()) sel = selector.select(unlabeled, ctx);
                if (sel.ids.size() > ctx.budget) throw DataError(selector.name() + " selected more frames than budgeted");

                RoundRecord rec;
                rec.round = k;
                rec.epoch = epoch;
                rec.budget = ctx.budget;
                rec.selected = sel.ids;
                rec.candidate_scores = std::move(sel.scores);

                std::vector<std::pair<std::string, std::string>> annotated;
                for (const auto& id : sel.ids) {
                    const auto it = by_id.find(id);
                    if (it == by_id.end() || it->second->domain != Domain::Target) {
                        throw DataError(selector.name() + " selected unknown target frame '" + id + "'");
                    }
                    auto label = annotator.annotate(*it->second);
                    if (!label) {
                        report.halted = true;
                        break;
                    }
                    annotated.emplace_back(id, *label);
                }
                if (report.halted) {
                    report.manifest = sel.ids;
                    rec.labeled_total = result.state.labeled_target.size();
                    report.rounds.push_back(std::move(rec));
                    report.warnings.push_back("selected frames carry no labels; halted for offline annotation");
                    break;
                }

                result.state = update_labeled_pool(result.state, sel.ids);
                for (auto& [id, label] : annotated) {
                    labeled_ids.insert(id);
                    labels[id] = label;
                    training_set.push_back(LabeledFrame{by_id.at(id), label});
                }
                rec.labeled_total = result.state.labeled_target.size();
                report.rounds.push_back(std::move(rec));
            }
            detector = oracle.finetune(detector, training_set, 1);
            if (auto acc = maybe_evaluate(oracle, detector, eval)) report.epoch_accuracy.push_back(*acc);
        }
    }

    report.final_accuracy = maybe_evaluate(oracle, detector, eval);
    result.detector = std::move(detector);
    return result;
}

RunResult run_bi3d(std::span<const FrameRecord> source, std::span<const FrameRecord> target,
                   std::span<const FrameRecord> eval, DetectorOracle& oracle, const PipelineConfig& cfg,
                   const Annotator& annotator) {
    DiversitySelector selector(cfg.banks, cfg.entropy_base);
    return run_pipeline(source, target, eval, oracle, selector, cfg, annotator);
}

BudgetSchedule preset_schedule(const std::string& name) {
    struct Preset {
        const char* name;
        std::size_t per_round;
        std::vector<std::size_t> epochs;
    };
    static const std::vector<Preset> presets = {
        {"kitti-1%", 18, {0, 5}},          {"kitti-5%", 37, {0, 2, 4, 6, 8}},
        {"nuscenes-1%", 140, {0, 5}},      {"nuscenes-5%", 280, {0, 2, 4, 6, 8}},
        {"lyft-1%", 94, {0, 5}},           {"lyft-5%", 188, {0, 2, 4, 6, 8}},
    };
    for (const auto& p : presets) {
        if (name == p.name) {
            BudgetSchedule s;
            s.trigger_epochs = p.epochs;
            s.per_round.assign(p.epochs.size(), p.per_round);
            return s;
        }
    }
    throw DataError("unknown schedule preset '" + name + "'");
}

} // namespace bi3d::pipeline
