#include <cstdio>

#include "kale/download.hpp"
#include "kale/errors.hpp"
#include "kale/pipeline.hpp"

namespace kale {

namespace {

ConfigList int_list(std::initializer_list<std::int64_t> xs) {
    ConfigList l;
    for (auto x : xs) l.emplace_back(x);
    return l;
}

ConfigList real_list(std::initializer_list<double> xs) {
    ConfigList l;
    for (auto x : xs) l.emplace_back(x);
    return l;
}

void common_solver(Config& c, double lr, std::int64_t epochs) {
    c.set("SOLVER.SEED", std::int64_t{2020});
    c.set("SOLVER.BASE_LR", lr);
    c.set("SOLVER.MAX_EPOCHS", epochs);
    c.set("OUTPUT_DIR", std::string("./outputs"));
}

Config mpca_defaults() {
    Config c;
    c.set("DATASET.NAME", std::string("tensor_patterns"));
    c.set("DATASET.N_PER_CLASS", std::int64_t{100});
    c.set("DATASET.SHAPE", int_list({16, 16, 8}));
    c.set("DATASET.BLOCK_SHAPE", int_list({4, 4, 2}));
    c.set("DATASET.BLOCK_OFFSET", int_list({6, 6, 3}));
    c.set("DATASET.MU", 2.0);
    c.set("DATASET.NOISE", 1.0);
    c.set("DATASET.VAL_FRACTION", 0.1);
    c.set("DATASET.TEST_FRACTION", 0.2);
    common_solver(c, 0.1, 500);
    c.set("MODEL.STANDARDIZE", false);
    c.set("MODEL.VARIANCE_RATIO", 0.97);
    c.set("MODEL.MAX_ITERS", std::int64_t{1});
    c.set("MODEL.N_FEATURES", std::int64_t{64});
    c.set("MODEL.CLASSIFIER", std::string("logistic"));
    c.set("MODEL.LAMBDA_REG", 1e-3);
    c.set("MODEL.TOP_WEIGHTS", std::int64_t{32});
    return c;
}

Config dann_defaults() {
    Config c;
    c.set("DATASET.NAME", std::string("domain_shift_blobs"));
    c.set("DATASET.N_PER_CLASS", std::int64_t{500});
    c.set("DATASET.CENTERS", real_list({-1.0, 0.0, 1.0, 0.0}));
    c.set("DATASET.NOISE", 0.5);
    c.set("DATASET.ROTATION_DEG", 30.0);
    c.set("DATASET.TRANSLATION", real_list({1.0, -1.0}));
    c.set("DATASET.VAL_FRACTION", 0.1);
    common_solver(c, 0.003, 30);
    c.set("SOLVER.TRAIN_BATCH_SIZE", std::int64_t{64});
    c.set("MODEL.ADAPTATION", std::string("dann"));
    c.set("MODEL.HIDDEN", int_list({16}));
    c.set("MODEL.FEATURE_DIM", std::int64_t{8});
    c.set("MODEL.DOMAIN_HIDDEN", std::int64_t{16});
    c.set("MODEL.LAMBDA_MAX", 1.0);
    c.set("MODEL.GAMMA", 10.0);
    c.set("MODEL.TRADE_OFF", 1.0);
    c.set("MODEL.MMD_BANDWIDTHS", real_list({0.5, 1.0, 2.0, 4.0}));
    return c;
}

Config deepdta_defaults() {
    Config c;
    c.set("DATASET.NAME", std::string("dta_strings"));
    c.set("DATASET.N", std::int64_t{2500});
    c.set("DATASET.DRUG_MAX_LEN", std::int64_t{40});
    c.set("DATASET.TARGET_MAX_LEN", std::int64_t{200});
    c.set("DATASET.MAX_PLANTED_MOTIFS", std::int64_t{3});
    c.set("DATASET.NOISE", 0.1);
    c.set("DATASET.VAL_SIZE", std::int64_t{0});
    c.set("DATASET.TEST_SIZE", std::int64_t{500});
    common_solver(c, 0.001, 20);
    c.set("SOLVER.TRAIN_BATCH_SIZE", std::int64_t{32});
    c.set("MODEL.DRUG_EMBEDDING_DIM", std::int64_t{32});
    c.set("MODEL.DRUG_FILTERS", int_list({16, 32}));
    c.set("MODEL.DRUG_KERNELS", int_list({4, 6}));
    c.set("MODEL.TARGET_EMBEDDING_DIM", std::int64_t{32});
    c.set("MODEL.TARGET_FILTERS", int_list({16, 32}));
    c.set("MODEL.TARGET_KERNELS", int_list({4, 8}));
    c.set("MODEL.DECODER_HIDDEN", int_list({64, 32}));
    return c;
}

std::size_t to_size(std::int64_t v, std::string_view key) {
    if (v < 0) throw ConfigTypeError(std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
}

Shape shape_of(const Config& cfg, std::string_view key) {
    Shape s;
    for (auto v : cfg.get_int_list(key)) s.push_back(to_size(v, key));
    return s;
}

}  // namespace

Config default_config(std::string_view subcommand) {
    if (subcommand == "mpca") return mpca_defaults();
    if (subcommand == "dann") return dann_defaults();
    if (subcommand == "deepdta") return deepdta_defaults();
    throw ValueError("unknown subcommand '" + std::string(subcommand) + "'");
}

std::string make_run_id(const Config& cfg) {
    return "run-" + std::to_string(cfg.get_int("SOLVER.SEED")) + "-" + sha256_hex(dump_config(cfg)).substr(0, 8);
}

TensorPatternParams tensor_pattern_params(const Config& cfg) {
    TensorPatternParams p;
    p.n_per_class = to_size(cfg.get_int("DATASET.N_PER_CLASS"), "DATASET.N_PER_CLASS");
    p.shape = shape_of(cfg, "DATASET.SHAPE");
    p.block_shape = shape_of(cfg, "DATASET.BLOCK_SHAPE");
    p.block_offset = shape_of(cfg, "DATASET.BLOCK_OFFSET");
    p.mu = cfg.get_real("DATASET.MU");
    p.noise = cfg.get_real("DATASET.NOISE");
    return p;
}

BlobParams blob_params(const Config& cfg) {
    BlobParams p;
    p.n_per_class = to_size(cfg.get_int("DATASET.N_PER_CLASS"), "DATASET.N_PER_CLASS");
    const auto centers = cfg.get_real_list("DATASET.CENTERS");
    if (centers.size() < 4 || centers.size() % 2 != 0) {
        throw ConfigTypeError("DATASET.CENTERS needs x, y pairs for at least two classes");
    }
    p.centers.clear();
    for (std::size_t i = 0; i < centers.size(); i += 2) p.centers.push_back({centers[i], centers[i + 1]});
    p.noise = cfg.get_real("DATASET.NOISE");
    p.rotation_deg = cfg.get_real("DATASET.ROTATION_DEG");
    const auto t = cfg.get_real_list("DATASET.TRANSLATION");
    if (t.size() != 2) throw ConfigTypeError("DATASET.TRANSLATION needs two entries");
    p.translation = {t[0], t[1]};
    return p;
}

DtaParams dta_params(const Config& cfg) {
    DtaParams p;
    p.n = to_size(cfg.get_int("DATASET.N"), "DATASET.N");
    p.drug_max_len = to_size(cfg.get_int("DATASET.DRUG_MAX_LEN"), "DATASET.DRUG_MAX_LEN");
    p.target_max_len = to_size(cfg.get_int("DATASET.TARGET_MAX_LEN"), "DATASET.TARGET_MAX_LEN");
    p.max_planted_motifs = to_size(cfg.get_int("DATASET.MAX_PLANTED_MOTIFS"), "DATASET.MAX_PLANTED_MOTIFS");
    p.noise = cfg.get_real("DATASET.NOISE");
    return p;
}

}  // namespace kale
