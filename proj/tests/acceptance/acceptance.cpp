// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
//
//   kale_acceptance [--coverage-json FILE] [--work-dir DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kale/cli.hpp"
#include "kale/config.hpp"
#include "kale/embed.hpp"
#include "kale/errors.hpp"
#include "kale/evaluate.hpp"
#include "kale/interpret.hpp"
#include "kale/nn.hpp"
#include "kale/pipeline.hpp"
#include "oracles/mpca_oracle.hpp"

using namespace kale;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Tensor random_tensor(Shape shape, RngStream& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = rng.normal();
    return t;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
    using nn::LayerSpec;
    const auto t0 = Clock::now();
    double worst = 0.0, worst_linear = 0.0;
    std::size_t nets = 0;
    bool kinds[7] = {};
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        RngStream rng(1000 + seed);
        const std::size_t a = 2 + rng.below(3), b = 2 + rng.below(4), batch = 2 + rng.below(4);
        std::vector<LayerSpec> layers;
        Shape in;
        Tensor x, y;
        nn::LossSpec loss;
        switch (seed % 4) {
            case 0:
                in = {a};
                layers = {LayerSpec::dense(a, b), LayerSpec::relu(), LayerSpec::dense(b, 3)};
                x = random_tensor({batch, a}, rng);
                y = Tensor({batch});
                for (auto& v : y.data()) v = double(rng.below(3));
                loss = {nn::LossKind::softmax_cross_entropy};
                break;
            case 1: {
                const std::size_t len = 6 + rng.below(3);
                in = {a, len};
                layers = {LayerSpec::conv1d(a, b, 3, 1 + rng.below(2)), LayerSpec::relu(), LayerSpec::flatten()};
                const std::size_t flat = shape_size(nn::Net(in, layers, RngStream(0)).output_shape());
                layers.push_back(LayerSpec::dense(flat, 2));
                x = random_tensor({batch, a, len}, rng);
                y = random_tensor({batch, 2}, rng);
                loss = {nn::LossKind::mse};
                break;
            }
            case 2: {
                const std::size_t len = 5 + rng.below(3), vocab = 4 + rng.below(4);
                in = {len};
                layers = {LayerSpec::embedding(vocab, a), LayerSpec::conv1d(a, b, 2), LayerSpec::relu(),
                          LayerSpec::global_max_pool(), LayerSpec::dense(b, 2)};
                x = Tensor({batch, len});
                for (auto& v : x.data()) v = double(rng.below(vocab));
                y = Tensor({batch});
                for (auto& v : y.data()) v = double(rng.below(2));
                loss = {nn::LossKind::softmax_cross_entropy};
                break;
            }
            default:
                in = {a};
                // grad_reverse(-1) has an identity backward, comparable with forward differences.
                layers = {LayerSpec::dense(a, b), LayerSpec::grad_reverse(-1.0), LayerSpec::relu(),
                          LayerSpec::dense(b, 1)};
                x = random_tensor({batch, a}, rng);
                y = random_tensor({batch, 1}, rng);
                loss = {nn::LossKind::mse};
        }
        nn::Net net(in, layers, rng.child(7));
        for (const auto& l : layers) kinds[static_cast<int>(l.kind)] = true;
        worst = std::max(worst, nn::finite_diff_grad_check(net, x, y, loss, 1e-5));
        ++nets;
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RngStream rng(2000 + seed);
        const std::size_t a = 2 + rng.below(4), b = 1 + rng.below(3);
        nn::Net net({a}, {nn::LayerSpec::dense(a, b)}, rng.child(1));
        worst_linear = std::max(worst_linear, nn::finite_diff_grad_check(net, random_tensor({4, a}, rng),
                                                                         random_tensor({4, b}, rng),
                                                                         {nn::LossKind::mse}, 1e-5));
    }
    const double secs = since(t0);
    const bool all_kinds = std::all_of(std::begin(kinds), std::end(kinds), [](bool k) { return k; });
    return {worst < 1e-4 && worst_linear < 1e-7 && nets >= 20 && all_kinds && secs < 30.0,
            std::to_string(nets) + " nets, all layer kinds " + (all_kinds ? "covered" : "NOT covered") +
                ", worst rel err " + fmt(worst, 3) + " (< 1e-4), linear+mse " + fmt(worst_linear, 3) +
                " (< 1e-7), " + fmt(secs, 3) + " s (< 30 s)"};
}

Outcome mpca_correctness() {
    RngStream rng(31);
    auto samples = [&](std::size_t n, const Shape& shape) {
        std::vector<Tensor> xs;
        for (std::size_t i = 0; i < n; ++i) {
            Tensor t(shape);
            for (std::size_t f = 0; f < t.size(); ++f) t[f] = (1.0 + 0.3 * (f % 5)) * rng.normal();
            xs.push_back(std::move(t));
        }
        return xs;
    };

    const auto xs = samples(30, {4, 3, 5});
    const auto full = mpca_fit(xs, 1.0, 2);
    double roundtrip = 0.0;
    for (const auto& x : xs) roundtrip = std::max(roundtrip, max_abs_diff(full.inverse_transform(full.transform(x)).data(), x.data()));

    double ortho = 0.0;
    for (double q : {0.7, 0.9, 1.0})
        for (std::size_t iters : {0, 1, 3}) {
            const auto m = mpca_fit(xs, q, iters);
            for (const auto& u : m.projections()) {
                const auto g = gram(u);
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j)
                        ortho = std::max(ortho, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
            }
        }

    const auto small = samples(20, {3, 3, 3});
    std::vector<std::vector<double>> flat;
    for (const auto& x : small) flat.push_back(x.values());
    double oracle_diff = 0.0;
    bool dims_match = true;
    for (double q : {0.8, 1.0})
        for (int iters : {1, 3}) {
            const auto m = mpca_fit(small, q, static_cast<std::size_t>(iters));
            const auto o = oracle::mpca(flat, {3, 3, 3}, q, iters);
            for (std::size_t n = 0; n < 3; ++n) {
                if (m.projected_shape()[n] != static_cast<std::size_t>(o.dims[n])) {
                    dims_match = false;
                    continue;
                }
                const auto& u = m.projections()[n];
                for (std::size_t r = 0; r < u.rows(); ++r)
                    for (std::size_t c = 0; c < u.cols(); ++c)
                        oracle_diff = std::max(oracle_diff, std::abs(u(r, c) - o.projections[n](r, c)));
            }
            for (const auto& x : small) {
                const auto y = m.transform(x);
                const auto oy = oracle::project(o, x.values(), {3, 3, 3});
                for (std::size_t i = 0; i < oy.size() && i < y.size(); ++i)
                    oracle_diff = std::max(oracle_diff, std::abs(y[i] - oy[i]));
            }
        }

    bool monotone = true;
    double prev = INFINITY;
    std::string errs;
    for (double q : {0.7, 0.9, 0.97, 1.0}) {
        const auto m = mpca_fit(xs, q);
        double err = 0.0;
        for (const auto& x : xs) err += frobenius_norm(m.inverse_transform(m.transform(x)) - x);
        monotone = monotone && err <= prev + 1e-9;
        errs += (errs.empty() ? "" : " >= ") + fmt(err, 4);
        prev = err;
    }
    return {roundtrip < 1e-8 && ortho < 1e-8 && dims_match && oracle_diff < 1e-8 && monotone,
            "(a) round-trip " + fmt(roundtrip, 3) + " (b) orthonormality " + fmt(ortho, 3) + " (c) oracle diff " +
                fmt(oracle_diff, 3) + (dims_match ? "" : " dims differ") + " (d) recon " + errs};
}

Outcome metric_oracles() {
    RngStream rng(41);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(50);
        std::vector<int> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = int(rng.below(3));
            b[i] = int(rng.below(3));
        }
        std::size_t same = 0;
        for (std::size_t i = 0; i < n; ++i) same += a[i] == b[i];
        mismatches += accuracy(a, b) != double(same) / double(n);
    }
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(49);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = trial % 2 ? double(rng.below(5)) : rng.normal();
            y[i] = int(rng.below(2));
        }
        y[0] = 0;
        y[n - 1] = 1;
        double total = 0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (y[i] == 1 && y[j] == 0) {
                    total += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
                    ++pairs;
                }
        mismatches += roc_auc(s, y) != total / double(pairs);
    }
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(49);
        std::vector<double> p(n), o(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = trial % 2 ? double(rng.below(6)) : rng.normal();
            o[i] = double(rng.below(8));
        }
        o[0] = 0;
        o[1] = 1;
        double total = 0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (o[i] > o[j]) {
                    total += p[i] > p[j] ? 1.0 : p[i] == p[j] ? 0.5 : 0.0;
                    ++pairs;
                }
        mismatches += concordance_index(p, o) != total / double(pairs);
    }
    const bool worked = roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) == 0.75 &&
                        concordance_index(std::vector<double>{0.9, 0.1, 0.5}, std::vector<double>{3, 1, 2}) == 1.0 &&
                        concordance_index(std::vector<double>{0.1, 0.9, 0.5}, std::vector<double>{3, 1, 2}) == 0.0 &&
                        accuracy(std::vector<int>{0, 1, 1, 0}, std::vector<int>{0, 1, 0, 0}) == 0.75;
    return {mismatches == 0 && worked, "600 random instances, " + std::to_string(mismatches) +
                                           " mismatches; worked examples " + (worked ? "exact" : "WRONG")};
}

Outcome config_fidelity(const fs::path& fixtures) {
    Config d;
    d.set("SOLVER.BASE_LR", 0.05);
    d.set("SOLVER.MAX_EPOCHS", std::int64_t{100});
    d.set("SOLVER.SEED", std::int64_t{2020});
    d.set("ISON.DEPTH", std::int64_t{34});
    const auto merged = resolve_config(d, read_file(fixtures / "code2_overlay.yaml"));
    const bool values = merged.get_real("SOLVER.BASE_LR") == 0.01 && merged.get_int("SOLVER.MAX_EPOCHS") == 10 &&
                        merged.get_int("ISON.DEPTH") == 38 && merged.get_int("SOLVER.SEED") == 2020;
    auto throws = [&](auto&& f, auto tag) {
        try {
            f();
        } catch (const decltype(tag)&) {
            return true;
        } catch (...) {
            return false;
        }
        return false;
    };
    const bool unknown = throws([&] { resolve_config(d, "SOLVER:\n  LR: 1\n"); }, SchemaError(""));
    const bool type = throws([&] { resolve_config(d, "ISON:\n  DEPTH: 3.5\n"); }, ConfigTypeError("")) &&
                      throws([&] { resolve_config(d, "SOLVER:\n  BASE_LR: fast\n"); }, ConfigTypeError(""));
    bool roundtrip = resolve_config(d, dump_config(merged)) == merged;
    for (const char* sub : {"mpca", "dann", "deepdta"}) {
        const auto c = resolve_config(default_config(sub), std::nullopt);
        roundtrip = roundtrip && resolve_config(default_config(sub), dump_config(c)) == c &&
                    dump_config(resolve_config(default_config(sub), dump_config(c))) == dump_config(c);
    }
    return {values && unknown && type && roundtrip,
            std::string("BASE_LR=") + fmt(merged.get_real("SOLVER.BASE_LR")) + " MAX_EPOCHS=" +
                std::to_string(merged.get_int("SOLVER.MAX_EPOCHS")) + " ISON.DEPTH=" +
                std::to_string(merged.get_int("ISON.DEPTH")) + " SEED=" + std::to_string(merged.get_int("SOLVER.SEED")) +
                "; unknown-key " + (unknown ? "ok" : "MISSING") + ", type-mismatch " + (type ? "ok" : "MISSING") +
                ", round-trip " + (roundtrip ? "exact" : "DIFFERS")};
}

// Every file under `dir`, relative path -> bytes.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
    return files;
}

Outcome determinism(const fs::path& work) {
    std::string detail;
    bool ok = true;
    for (const char* sub : {"mpca", "dann", "deepdta"}) {
        std::map<std::string, std::string> runs[2];
        double worst = 0.0;
        for (int k = 0; k < 2; ++k) {
            const auto out = work / "determinism" / sub;
            fs::remove_all(out);
            cli::CliInvocation inv{sub, std::nullopt, {}, out};
            std::ostringstream o, e;
            const auto t0 = Clock::now();
            const int code = cli::run(inv, o, e);
            worst = std::max(worst, since(t0));
            if (code != cli::kExitOk) {
                ok = false;
                detail += std::string(sub) + " exit " + std::to_string(code) + " " + e.str();
            }
            runs[k] = snapshot(out);
        }
        const bool same = !runs[0].empty() && runs[0] == runs[1];
        ok = ok && same && worst < 300.0;
        detail += std::string(detail.empty() ? "" : "; ") + sub + " " + std::to_string(runs[0].size()) + " files " +
                  (same ? "identical" : "DIFFER") + ", " + fmt(worst, 3) + " s";
    }
    return {ok, detail + " (each < 300 s)"};
}

Config dann_config(std::uint64_t seed, std::vector<Override> extra) {
    extra.insert(extra.begin(), {"SOLVER.SEED", std::to_string(seed)});
    return resolve_config(default_config("dann"), std::nullopt, extra);
}

Outcome domain_adaptation() {
    double sum_dann = 0, sum_none = 0, sum_null_mmd = 0, sum_null_none = 0;
    const std::vector<std::uint64_t> seeds{2020, 2021, 2022, 2023, 2024};
    for (auto seed : seeds) {
        sum_dann += run_pipeline("dann", dann_config(seed, {})).final_metric("target_accuracy");
        sum_none += run_pipeline("dann", dann_config(seed, {{"MODEL.ADAPTATION", "none"}}))
                        .final_metric("target_accuracy");
        const std::vector<Override> null_shift{{"DATASET.ROTATION_DEG", "0.0"}, {"DATASET.TRANSLATION", "[0.0, 0.0]"}};
        auto mmd = null_shift, base = null_shift;
        mmd.emplace_back("MODEL.ADAPTATION", "dan_mmd");
        base.emplace_back("MODEL.ADAPTATION", "none");
        sum_null_mmd += run_pipeline("dann", dann_config(seed, mmd)).final_metric("target_accuracy");
        sum_null_none += run_pipeline("dann", dann_config(seed, base)).final_metric("target_accuracy");
    }
    const double n = double(seeds.size());
    const double dann = sum_dann / n, none = sum_none / n, null_mmd = sum_null_mmd / n, null_none = sum_null_none / n;

    const auto cfg_none = dann_config(2020, {{"MODEL.ADAPTATION", "none"}});
    const auto cfg_zero = dann_config(2020, {{"MODEL.LAMBDA_MAX", "0.0"}});
    const auto md = generate_domain_shift_blobs(blob_params(cfg_none), set_seed(2020).child(0));
    std::optional<DannNets> a, b;
    run_dann_pipeline(md, cfg_none, {}, &a);
    run_dann_pipeline(md, cfg_zero, {}, &b);
    const bool identical = a && b && a->extractor.same_parameters(b->extractor) &&
                           a->class_head.same_parameters(b->class_head);

    const bool pass = dann >= none + 0.10 && identical && std::abs(null_mmd - null_none) <= 0.03;
    return {pass, "shifted: dann " + fmt(dann) + " vs none " + fmt(none) + " (gain " + fmt(dann - none, 3) +
                      " >= 0.10); lambda_max=0 trajectory " + (identical ? "identical" : "DIFFERS") +
                      "; null shift: dan_mmd " + fmt(null_mmd) + " vs none " + fmt(null_none) + " (|diff| " +
                      fmt(std::abs(null_mmd - null_none), 3) + " <= 0.03)"};
}

Outcome deepdta_efficacy() {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : {2020, 2021, 2022}) {
        const Override o[] = {{"SOLVER.SEED", std::to_string(seed)}};
        const auto cfg = resolve_config(default_config("deepdta"), std::nullopt, o);
        const auto r = run_pipeline("deepdta", cfg);
        const auto& y = r.test_targets;
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
        double var = 0.0;
        for (double v : y) var += (v - mean) * (v - mean);
        var /= double(y.size());
        const double ci = r.final_metric("ci"), mse = r.final_metric("mse");
        ok = ok && ci >= 0.7 && mse < var && y.size() == 500;
        detail += std::string(detail.empty() ? "" : "; ") + "seed " + std::to_string(seed) + ": ci " + fmt(ci) +
                  " mse " + fmt(mse) + " var " + fmt(var) + " (n_test " + std::to_string(y.size()) + ")";
    }
    return {ok, detail + " (ci >= 0.7, mse < var)"};
}

Outcome interpretation_recovery() {
    const auto cfg = resolve_config(default_config("mpca"), std::nullopt);
    const auto r = run_pipeline("mpca", cfg);
    const auto params = tensor_pattern_params(cfg);
    const auto top = select_top_weight(r.weight_map->weights, std::size_t{32});
    std::size_t selected = 0, inside = 0;
    const Shape& s = params.shape;
    for (std::size_t i = 0; i < s[0]; ++i)
        for (std::size_t j = 0; j < s[1]; ++j)
            for (std::size_t k = 0; k < s[2]; ++k) {
                if (top.at({i, j, k}) == 0.0) continue;
                ++selected;
                const std::size_t idx[] = {i, j, k};
                bool in = true;
                for (int m = 0; m < 3; ++m)
                    in = in && idx[m] >= params.block_offset[m] && idx[m] < params.block_offset[m] + params.block_shape[m];
                inside += in;
            }
    const double frac = selected ? double(inside) / double(selected) : 0.0;
    return {frac >= 0.5 && selected == 32, std::to_string(inside) + "/" + std::to_string(selected) +
                                               " of the top-32 |weights| inside the planted block (>= 50%)"};
}

Outcome mmd_closed_form() {
    const Tensor a({1, 2}, std::vector<double>{0, 0}), b({1, 2}, std::vector<double>{2, 0});
    const double bw[] = {1.0};
    const double two = nn::mmd_rbf(a, b, bw).value;
    const double expected = 2.0 - 2.0 * std::exp(-2.0);
    RngStream rng(91);
    const auto x = random_tensor({8, 3}, rng);
    const double bws[] = {0.5, 1.0, 2.0, 4.0};
    const double same = nn::mmd_rbf(x, x, bws).value;
    return {std::abs(two - expected) <= 1e-12 && std::abs(same) <= 1e-12,
            "two-point " + fmt(two, 17) + " vs " + fmt(expected, 17) + ", identical samples " + fmt(same, 3)};
}

Outcome engineering(const std::optional<fs::path>& coverage_json, const fs::path& fixtures) {
    std::uintmax_t bytes = 0;
    for (const auto& e : fs::recursive_directory_iterator(fixtures))
        if (e.is_regular_file()) bytes += e.file_size();
    const bool small = bytes < 1024 * 1024;
    std::string detail = "fixtures " + std::to_string(bytes) + " bytes (< 1 MB)";
    if (!coverage_json || !fs::exists(*coverage_json)) return {false, detail + "; coverage summary not found"};
    double percent = -1.0;
    try {
        const auto j = nlohmann::json::parse(read_file(*coverage_json));
        percent = j.at("line_percent").get<double>();
    } catch (const std::exception& e) {
        return {false, detail + "; unreadable coverage summary: " + e.what()};
    }
    return {small && percent >= 85.0, detail + "; line coverage " + fmt(percent, 4) + "% (>= 85%)"};
}

}  // namespace

int main(int argc, char** argv) {
    std::optional<fs::path> coverage_json;
    fs::path work = fs::temp_directory_path() / "kale_acceptance";
    for (int i = 1; i < argc; i += 2) {
        const std::string flag = i + 1 < argc ? argv[i] : "";
        if (flag == "--coverage-json") {
            coverage_json = argv[i + 1];
        } else if (flag == "--work-dir") {
            work = argv[i + 1];
        } else {
            std::cerr << "usage: kale_acceptance [--coverage-json FILE] [--work-dir DIR]\n";
            return 2;
        }
    }
    const fs::path fixtures = KALE_FIXTURES_DIR;

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient correctness", gradient_correctness},
        {"MPCA correctness", mpca_correctness},
        {"metric oracles", metric_oracles},
        {"config fidelity", [&] { return config_fidelity(fixtures); }},
        {"determinism", [&] { return determinism(work); }},
        {"domain adaptation efficacy", domain_adaptation},
        {"DeepDTA-style efficacy", deepdta_efficacy},
        {"interpretation recovery", interpretation_recovery},
        {"MMD closed form", mmd_closed_form},
        {"engineering parity", [&] { return engineering(coverage_json, fixtures); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first
                  << "): " << o.detail << " [" << fmt(since(t0), 3) << " s]" << std::endl;
    }
    fs::remove_all(work);
    return failures ? 1 : 0;
}
