// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "embal/gengap.hpp"
#include "embal/metrics.hpp"
#include "embal/neighbors.hpp"
#include "embal/oversamplers.hpp"
#include "embal/pipeline.hpp"
#include "embal/serialization.hpp"
#include "oracles.hpp"

using namespace embal;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1. kNN equals a full-sort oracle on 20 random sets (n <= 500, d <= 16), ties included; < 5 s.
Outcome knn_oracle() {
    Outcome out;
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> n_dist(20, 500), d_dist(1, 16);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = n_dist(rng), d = d_dist(rng);
        // Even trials: small integer grid, so exact distance ties are frequent.
        const auto set = trial % 2 == 0 ? oracle::random_integer_set(rng, n, d, 3, 2)
                                         : oracle::random_real_set(rng, n, d, 3);
        const std::size_t k = 1 + rng() % std::min<std::size_t>(n - 1, 40);
        for (bool self_excluded : {true, false}) {
            const auto table = knn(set, k, self_excluded);
            std::vector<std::vector<std::size_t>> idx;
            std::vector<std::vector<double>> dist;
            oracle::brute_force_knn(set, k, self_excluded, idx, dist);
            out.require(table.indices == idx, "index mismatch on trial " + std::to_string(trial));
            out.require(table.distances == dist, "distance mismatch on trial " + std::to_string(trial));
        }
    }
    const double elapsed = seconds_since(start);
    out.require(elapsed < 5.0, "runtime " + std::to_string(elapsed) + " s");
    if (out.pass) out.detail = "20 sets, runtime " + std::to_string(elapsed) + " s";
    return out;
}

// 2. Gap identity, hand fixture, monotonicity and translation invariance.
Outcome gap_properties() {
    Outcome out;
    const auto range = [](double lo, double hi) {
        FeatureRanges r(2, 1);
        const double a[] = {lo}, b[] = {hi};
        r.include(0, a);
        r.include(0, b);
        return r;
    };
    out.require(generalization_gap(range(0, 1), range(0, 1)).overall_gap == 0.0, "identity fixture not zero");
    const double hand = generalization_gap(range(0, 1), range(-0.5, 1.2)).per_class_gap[0];
    out.require(std::abs(hand - 0.35) <= 1e-12, "hand fixture gave " + std::to_string(hand));

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> amount(0.01, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + trial % 6, classes = 2 + trial % 4;
        const auto train = oracle::random_real_set(rng, 80, d, classes);
        const auto test = oracle::random_real_set(rng, 50, d, classes);
        const auto base = generalization_gap(feature_ranges(train), feature_ranges(test));

        out.require(generalization_gap(feature_ranges(train), feature_ranges(train)).overall_gap == 0.0,
                    "identity failed on trial " + std::to_string(trial));

        // Push one test value outward.
        std::vector<double> wider(test.features().begin(), test.features().end());
        const std::size_t k = rng() % wider.size();
        wider[k] += (wider[k] >= 0 ? 1.0 : -1.0) * amount(rng);
        const LabeledEmbeddingSet pushed(wider, {test.labels().begin(), test.labels().end()}, d, classes);
        const auto after_push = generalization_gap(feature_ranges(train), feature_ranges(pushed));
        for (std::size_t c = 0; c < classes; ++c) {
            out.require(after_push.per_class_gap[c] >= base.per_class_gap[c],
                        "monotonicity (outward) failed on trial " + std::to_string(trial));
            out.require(base.per_class_gap[c] >= 0.0, "negative gap");
        }

        // Clamp one test row into the train envelope of its class.
        const auto tr = feature_ranges(train);
        std::vector<double> inward(test.features().begin(), test.features().end());
        const ClassId c0 = test.label(0);
        for (std::size_t f = 0; f < d; ++f) {
            inward[f] = std::clamp(inward[f], tr.min(c0, f), tr.max(c0, f));
        }
        const LabeledEmbeddingSet moved_in(inward, {test.labels().begin(), test.labels().end()}, d, classes);
        const auto after_in = generalization_gap(tr, feature_ranges(moved_in));
        out.require(after_in.per_class_gap[c0] <= base.per_class_gap[c0],
                    "monotonicity (inward) failed on trial " + std::to_string(trial));

        std::vector<double> offset(d);
        for (auto& v : offset) v = amount(rng) - 1.5;
        const auto shift = [&](const LabeledEmbeddingSet& s) {
            std::vector<double> f(s.features().begin(), s.features().end());
            for (std::size_t i = 0; i < s.size(); ++i) {
                for (std::size_t j = 0; j < d; ++j) f[i * d + j] += offset[j];
            }
            return LabeledEmbeddingSet(f, {s.labels().begin(), s.labels().end()}, d, classes);
        };
        const auto moved = generalization_gap(feature_ranges(shift(train)), feature_ranges(shift(test)));
        for (std::size_t c = 0; c < classes; ++c) {
            out.require(std::abs(moved.per_class_gap[c] - base.per_class_gap[c]) <= 1e-9,
                        "translation invariance failed on trial " + std::to_string(trial));
        }
    }
    if (out.pass) out.detail = "hand fixture " + std::to_string(hand) + ", 100 randomized fixtures";
    return out;
}

// 3. Balance and provenance reconstruction for smote, borderline_smote, eos.
Outcome sampler_balance() {
    Outcome out;
    std::mt19937_64 rng(31337);
    std::size_t synthetic_rows = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t classes = 2 + trial % 5, d = 2 + trial % 7;
        const auto profile = exponential_profile(classes, 40 + 10 * (trial % 6), 2.0 + trial);
        const auto set = gaussian_mixture(classes, d, profile, 2.0, 1.0, rng());
        OversampleConfig cfg;
        cfg.k = 1 + trial % 10;
        cfg.seed = rng();
        const std::size_t majority = profile.counts.front();

        std::vector<std::pair<std::string, ResampleResult>> results;
        results.emplace_back("smote", smote(set, cfg));
        results.emplace_back("borderline_smote", borderline_smote(set, cfg));
        results.emplace_back("eos", eos(set, cfg));
        cfg.eos_direction = EosDirection::away_from_enemy;
        results.emplace_back("eos(away)", eos(set, cfg));

        for (const auto& [name, r] : results) {
            out.require(r.balanced.histogram() == std::vector<std::size_t>(classes, majority),
                        name + " histogram not balanced on trial " + std::to_string(trial));
            for (std::size_t i = 0; i < r.synthetic.size(); ++i) {
                const auto rebuilt = r.synthetic.reconstruct(i, set);
                double diff = 0.0, norm = 0.0;
                for (std::size_t f = 0; f < d; ++f) {
                    diff += std::pow(rebuilt[f] - r.synthetic.row(i)[f], 2);
                    norm += std::pow(rebuilt[f], 2);
                }
                out.require(std::sqrt(diff) <= 1e-9 * std::max(1.0, std::sqrt(norm)),
                            name + " provenance mismatch on trial " + std::to_string(trial));
                out.require(r.synthetic.labels[i] == set.label(r.synthetic.provenance[i].base_row),
                            name + " label differs from base");
            }
            synthetic_rows += r.synthetic.size();
        }
    }
    if (out.pass) out.detail = "20 sets, " + std::to_string(synthetic_rows) + " synthetic rows checked";
    return out;
}

// 4. smote stays inside the minority envelope; eos(toward_enemy) extends it toward the majority mean.
Outcome range_behavior() {
    Outcome out;
    MixtureMeans means;
    means.dim = 4;
    means.means = {0, 0, 0, 0, 2.5, -2.5, 2.5, -2.5};
    const auto set = sample_mixture(means, {{25, 500}}, 1.0, 4242);  // class 0 is the minority
    OversampleConfig cfg;
    cfg.seed = 9;
    const auto original = feature_ranges(set);
    const auto after_smote = feature_ranges(smote(set, cfg).balanced);
    const auto after_eos = feature_ranges(eos(set, cfg).balanced);
    for (std::size_t f = 0; f < 4; ++f) {
        out.require(after_smote.min(0, f) >= original.min(0, f) - 1e-9 &&
                        after_smote.max(0, f) <= original.max(0, f) + 1e-9,
                    "smote extended feature " + std::to_string(f));
    }
    std::size_t extended = 0;
    for (std::size_t f = 0; f < 4; ++f) {
        const bool majority_above = means.means[4 + f] > means.means[f];
        extended += majority_above ? after_eos.max(0, f) > original.max(0, f) + 1e-9
                                   : after_eos.min(0, f) < original.min(0, f) - 1e-9;
    }
    out.require(extended >= 1, "eos did not extend the minority envelope toward the majority");
    if (out.pass) out.detail = "eos extended " + std::to_string(extended) + "/4 features toward the majority";
    return out;
}

// 5. CE and hinge gradients vs central differences over 50 random (head, batch) pairs.
Outcome gradient_checks() {
    Outcome out;
    std::mt19937_64 rng(555);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t classes = 2 + trial % 5, d = 1 + trial % 8, n = 1 + trial % 16;
        const auto batch = oracle::random_real_set(rng, std::max(n, classes), d, classes);
        for (LossKind kind : {LossKind::softmax_ce, LossKind::hinge_ovr}) {
            auto head = init_head(classes, d, kind, rng());
            for (auto& b : head.biases) b = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
            const auto fn = kind == LossKind::softmax_ce ? softmax_ce_loss : hinge_ovr_loss;
            if (kind == LossKind::hinge_ovr) {
                // Keep away from hinge kinks, where the loss is not differentiable.
                bool near_kink = true;
                while (near_kink) {
                    near_kink = false;
                    for (std::size_t i = 0; i < batch.size() && !near_kink; ++i) {
                        const auto z = head.logits(batch.row(i));
                        for (std::size_t c = 0; c < classes; ++c) {
                            const double t = c == batch.label(i) ? 1.0 : -1.0;
                            near_kink |= std::abs(1.0 - t * z[c]) < 1e-3;
                        }
                    }
                    if (near_kink) head.biases[rng() % classes] += 0.01;
                }
            }
            const double decay = 1e-3 * (trial % 4);
            const auto analytic = fn(head, batch.features(), batch.labels(), decay);
            const auto numeric = oracle::numeric_gradient(
                [&](const std::vector<double>& x) {
                    return fn(oracle::unflatten(head, x), batch.features(), batch.labels(), decay).loss;
                },
                oracle::flatten(head));
            std::vector<double> g = analytic.grad_weights;
            g.insert(g.end(), analytic.grad_biases.begin(), analytic.grad_biases.end());
            const double err = oracle::relative_error(g, numeric);
            worst = std::max(worst, err);
            out.require(err < 1e-4, to_string(kind) + " gradient error " + std::to_string(err) + " on trial " +
                                        std::to_string(trial));
        }
    }
    if (out.pass) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "worst relative error %.2e", worst);
        out.detail = buf;
    }
    return out;
}

struct EndToEnd {
    double ceiling_bac = 0, baseline_bac = 0, smote_bac = 0, eos_bac = 0, smote_gap = 0, eos_gap = 0;
    std::vector<double> fp_gap, tp_gap;
    double seconds = 0;
};

EndToEnd run_end_to_end() {
    EndToEnd e;
    const auto start = Clock::now();
    const int seeds = 5;
    const std::vector<ClassId> smallest{7, 8, 9};
    for (int s = 0; s < seeds; ++s) {
        SynthConfig synth;
        synth.seed = static_cast<Seed>(s);
        const auto split = make_synthetic_split(synth);
        auto balanced_synth = synth;
        balanced_synth.rho = 1.0;
        const auto ceiling_head = train_head(make_synthetic_split(balanced_synth).train, TrainConfig{});
        e.ceiling_bac += bac(confusion(split.test.labels(), predict(ceiling_head, split.test.features()).labels, 10));

        ExperimentConfig cfg;
        cfg.seed = static_cast<Seed>(s);
        cfg.method = Method::smote;
        const auto smote_report = run_experiment(split.train, [&] { return split.test; }, cfg);
        cfg.method = Method::eos;
        const auto eos_report = run_experiment(split.train, [&] { return split.test; }, cfg);

        e.baseline_bac += eos_report.baseline.test_metrics.bac;
        e.smote_bac += smote_report.resampled->test_metrics.bac;
        e.eos_bac += eos_report.resampled->test_metrics.bac;
        e.smote_gap += mean_gap_over(smote_report.resampled->gap, smallest);
        e.eos_gap += mean_gap_over(eos_report.resampled->gap, smallest);
        e.fp_gap.push_back(eos_report.baseline.gap_by_outcome.gap_fp.overall_gap);
        e.tp_gap.push_back(eos_report.baseline.gap_by_outcome.gap_tp.overall_gap);
    }
    for (double* v : {&e.ceiling_bac, &e.baseline_bac, &e.smote_bac, &e.eos_bac, &e.smote_gap, &e.eos_gap}) *v /= seeds;
    e.seconds = seconds_since(start);
    return e;
}

// 6. EOS > SMOTE > baseline direction on the C=10, d=8, n_max=500, rho=100 fixture, 5 seeds.
Outcome end_to_end(const EndToEnd& e) {
    Outcome out;
    out.require(e.eos_bac >= e.baseline_bac + 0.05, "(a) EOS BAC not 0.05 above baseline");
    out.require(e.eos_bac >= e.smote_bac - 0.005, "(b) EOS BAC more than 0.005 below SMOTE");
    out.require(e.eos_gap < e.smote_gap, "(c) EOS minority gap not below SMOTE");
    out.require(e.seconds < 60.0, "runtime " + std::to_string(e.seconds) + " s");
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s; ceiling %.4f, baseline %.4f, smote %.4f, eos %.4f; minority gap smote %.4f eos %.4f; %.1f s",
                  out.pass ? "ok" : out.detail.c_str(), e.ceiling_bac, e.baseline_bac, e.smote_bac, e.eos_bac,
                  e.smote_gap, e.eos_gap, e.seconds);
    out.detail = buf;
    return out;
}

// 7. bac >= gm on 1000 random confusion matrices; recalls (1.0, 0.5) fixture; ranges.
Outcome metric_identities() {
    Outcome out;
    std::mt19937_64 rng(1000);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t classes = 2 + trial % 9;
        ConfusionMatrix m(classes);
        std::uniform_int_distribution<int> cell(0, 20);
        for (ClassId i = 0; i < classes; ++i) {
            m.add(i, static_cast<ClassId>(rng() % classes));  // every class has support
            for (ClassId j = 0; j < classes; ++j) {
                for (int k = cell(rng) * (i == j ? 2 : 1); k > 0; --k) m.add(i, j);
            }
        }
        const double b = bac(m), g = gm(m), f = macro_f1(m).value;
        out.require(b >= g - 1e-15, "bac < gm on trial " + std::to_string(trial));
        for (double v : {b, g, f}) out.require(v >= 0.0 && v <= 1.0, "metric outside [0,1]");
    }
    const std::vector<ClassId> y{0, 0, 1, 1}, p{0, 0, 1, 0};
    const auto m = confusion(y, p, 2);
    out.require(round4(bac(m)) == 0.75, "fixture BAC " + std::to_string(bac(m)));
    out.require(std::abs(gm(m) - 0.70711) <= 1e-5, "fixture GM " + std::to_string(gm(m)));
    if (out.pass) out.detail = "1000 matrices; fixture BAC 0.7500, GM " + std::to_string(gm(m));
    return out;
}

// 8. Two `pipeline` CLI executions produce identical reports apart from timings.
Outcome cli_determinism() {
    Outcome out;
    const auto dir = fs::temp_directory_path() / "embal_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = EMBAL_CLI;
    const std::string d = dir.string();
    auto run = [&](const std::string& args) {
        return std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    };
    out.require(run("synth --train " + d + "/train.bin --test " + d + "/test.bin --seed 11") == 0, "synth failed");
    for (const char* name : {"a", "b"}) {
        out.require(run("pipeline --train " + d + "/train.bin --test " + d + "/test.bin --method eos --seed 11 --report " +
                        d + "/" + name + ".json") == 0,
                    "pipeline failed");
    }
    if (!out.pass) return out;
    const auto read = [](const fs::path& path) {
        std::ifstream in(path);
        return nlohmann::json::parse(in);
    };
    auto a = read(dir / "a.json");
    auto b = read(dir / "b.json");
    a.erase("timings_ms");
    b.erase("timings_ms");
    // Artifact names embed the report name; compare the referenced heads by content instead.
    for (const char* key : {"baseline_head", "head"}) {
        std::ifstream ha(dir / a["artifacts"][key].get<std::string>()), hb(dir / b["artifacts"][key].get<std::string>());
        const std::string sa{std::istreambuf_iterator<char>(ha), {}}, sb{std::istreambuf_iterator<char>(hb), {}};
        out.require(sa == sb, std::string("head artifact ") + key + " differs");
    }
    a.erase("artifacts");
    b.erase("artifacts");
    out.require(a.dump(2) == b.dump(2), "reports differ");
    if (out.pass) out.detail = "reports and head artifacts identical";
    return out;
}

// 9. FP gap exceeds TP gap for the baseline head.
Outcome fp_vs_tp(const EndToEnd& e) {
    Outcome out;
    std::string values;
    for (std::size_t s = 0; s < e.fp_gap.size(); ++s) {
        out.require(e.fp_gap[s] > e.tp_gap[s], "seed " + std::to_string(s) + ": FP gap not above TP gap");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.4f/%.4f", s ? ", " : "", e.fp_gap[s], e.tp_gap[s]);
        values += buf;
    }
    if (out.pass) out.detail = "fp/tp per seed: " + values;
    return out;
}

// 10. The full suite (unit test binaries plus this acceptance run) finishes within 2 minutes.
Outcome suite_runtime(Clock::time_point acceptance_start) {
    Outcome out;
    const auto start = Clock::now();
    std::istringstream list(EMBAL_UNIT_TESTS);
    std::string exe;
    while (std::getline(list, exe, ',')) {
        if (exe.empty()) continue;
        exe = (fs::path(EMBAL_TEST_DIR) / exe).string();
        const int status = std::system((exe + " >/dev/null 2>&1").c_str());
        out.require(status == 0, "unit test binary failed: " + exe);
    }
    const double unit_seconds = seconds_since(start);
    const double acceptance_seconds = std::chrono::duration<double>(start - acceptance_start).count();
    const double total = unit_seconds + acceptance_seconds;
    out.require(total < 120.0, "suite took " + std::to_string(total) + " s");
    char buf[128];
    std::snprintf(buf, sizeof buf, "unit %.1f s + acceptance %.1f s = %.1f s", unit_seconds, acceptance_seconds, total);
    if (out.pass) out.detail = buf;
    return out;
}

} // namespace

int main() {
    const auto start = Clock::now();
    int failures = 0;
    const auto report = [&](int id, const char* name, const Outcome& o) {
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    };
    const auto guarded = [](const std::function<Outcome()>& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            return Outcome{false, std::string("exception: ") + e.what()};
        }
    };

    report(1, "kNN oracle equivalence", guarded(knn_oracle));
    report(2, "gap metric properties", guarded(gap_properties));
    report(3, "sampler balance + segment membership", guarded(sampler_balance));
    report(4, "range behavior smote vs eos", guarded(range_behavior));
    report(5, "gradient checks", guarded(gradient_checks));
    EndToEnd e2e;
    const auto e2e_outcome = guarded([&] {
        e2e = run_end_to_end();
        return end_to_end(e2e);
    });
    report(6, "synthetic end-to-end", e2e_outcome);
    report(7, "metric identities", guarded(metric_identities));
    report(8, "pipeline determinism", guarded(cli_determinism));
    report(9, "FP gap above TP gap", e2e.fp_gap.empty() ? Outcome{false, "end-to-end run failed"}
                                                        : guarded([&] { return fp_vs_tp(e2e); }));
    report(10, "full suite runtime", guarded([&] { return suite_runtime(start); }));

    std::printf("%d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
