#include "kale/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "kale/embed.hpp"
#include "kale/errors.hpp"
#include "kale/predict.hpp"
#include "kale/prepdata.hpp"

namespace kale {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t cfg_size(const Config& cfg, std::string_view key) {
    const auto v = cfg.get_int(key);
    if (v < 0) throw ConfigTypeError(std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> cfg_sizes(const Config& cfg, std::string_view key) {
    std::vector<std::size_t> out;
    for (auto v : cfg.get_int_list(key)) {
        if (v <= 0) throw ConfigTypeError(std::string(key) + " entries must be positive");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

RngStream pipeline_rng(const Config& cfg) {
    return set_seed(static_cast<std::uint64_t>(cfg.get_int("SOLVER.SEED"))).child(1);
}

RngStream data_rng(const Config& cfg) {
    return set_seed(static_cast<std::uint64_t>(cfg.get_int("SOLVER.SEED"))).child(0);
}

void prepare_dir(const RunOutput& out) {
    if (!out.dir) return;
    std::filesystem::create_directories(*out.dir);
    std::filesystem::remove(*out.dir / "metrics.csv");
}

void write_metrics(const RunOutput& out, const std::vector<MetricRecord>& records) {
    if (!out.dir) return;
    MetricLogger(*out.dir / "metrics.csv").log(records);
}

Tensor vector_tensor(const std::vector<double>& v) { return Tensor({v.size()}, v); }

/// (B, a) and (B, b) -> (B, a + b).
Tensor concat_columns(const Tensor& a, const Tensor& b) {
    const std::size_t rows = a.dim(0), ca = a.size() / rows, cb = b.size() / rows;
    Tensor out({rows, ca + cb});
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(a.data().data() + r * ca, ca, out.data().data() + r * (ca + cb));
        std::copy_n(b.data().data() + r * cb, cb, out.data().data() + r * (ca + cb) + ca);
    }
    return out;
}

std::pair<Tensor, Tensor> split_columns(const Tensor& g, std::size_t ca) {
    const std::size_t rows = g.dim(0), cols = g.dim(1), cb = cols - ca;
    Tensor a({rows, ca}), b({rows, cb});
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(g.data().data() + r * cols, ca, a.data().data() + r * ca);
        std::copy_n(g.data().data() + r * cols + ca, cb, b.data().data() + r * cb);
    }
    return {a, b};
}

/// Stacks (Ba, f) on top of (Bb, f).
Tensor concat_rows(const Tensor& a, const Tensor& b) {
    Shape s = a.shape();
    s[0] += b.dim(0);
    std::vector<double> v(a.data().begin(), a.data().end());
    v.insert(v.end(), b.data().begin(), b.data().end());
    return Tensor(std::move(s), std::move(v));
}

std::pair<Tensor, Tensor> split_rows(const Tensor& g, std::size_t rows_a) {
    const std::size_t width = g.size() / g.dim(0);
    Shape sa = g.shape(), sb = g.shape();
    sa[0] = rows_a;
    sb[0] = g.dim(0) - rows_a;
    const auto mid = g.values().begin() + static_cast<std::ptrdiff_t>(rows_a * width);
    return {Tensor(sa, std::vector<double>(g.values().begin(), mid)),
            Tensor(sb, std::vector<double>(mid, g.values().end()))};
}

/// Flattens every sample so the batch is (B, prod(sample shape)).
Tensor flatten_batch(const Tensor& batch) {
    if (batch.order() == 2) return batch;
    return batch.reshaped({batch.dim(0), batch.size() / batch.dim(0)});
}

std::vector<int> argmax_rows(const Tensor& logits) {
    const std::size_t rows = logits.dim(0), cols = logits.dim(1);
    std::vector<int> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = logits.data().data() + r * cols;
        out[r] = static_cast<int>(std::max_element(row, row + cols) - row);
    }
    return out;
}

std::vector<int> to_int_labels(std::span<const double> labels) {
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!(labels[i] >= 0) || labels[i] != std::floor(labels[i])) {
            throw ValueError("class labels must be non-negative integers");
        }
        out[i] = static_cast<int>(labels[i]);
    }
    return out;
}

bool has_both_classes(std::span<const int> labels) {
    return std::find(labels.begin(), labels.end(), 0) != labels.end() &&
           std::find(labels.begin(), labels.end(), 1) != labels.end();
}

}  // namespace

double TrainReport::final_metric(std::string_view name) const {
    for (const auto& m : final_metrics)
        if (m.name == name) return m.value;
    throw SchemaError("report has no final metric '" + std::string(name) + "'");
}

std::vector<MetricRecord> trainer_loop(std::span<nn::Net* const> nets, nn::Optimizer& optimizer,
                                       std::size_t epochs, RngStream rng, const TrainerHooks& hooks,
                                       const std::string& run_id) {
    std::vector<MetricRecord> records;
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        RngStream epoch_rng = rng.child(epoch);
        const std::size_t n_batches = hooks.begin_epoch(epoch, epoch_rng);
        double total = 0.0;
        for (std::size_t b = 0; b < n_batches; ++b) {
            const double loss = hooks.train_batch(epoch, b);
            if (!std::isfinite(loss)) {
                throw NonFiniteError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(b));
            }
            optimizer.step(nets);
            total += loss;
        }
        records.push_back({run_id, epoch, Split::train, "loss", n_batches ? total / static_cast<double>(n_batches) : 0.0});
        if (hooks.evaluate) {
            auto more = hooks.evaluate(epoch);
            records.insert(records.end(), more.begin(), more.end());
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// MPCA
// ---------------------------------------------------------------------------

TrainReport run_mpca_pipeline(const Dataset& dataset, const Config& cfg, const RunOutput& out) {
    const auto t0 = Clock::now();
    dataset.validate();
    const auto labels = to_int_labels(dataset.labels);
    for (int y : labels)
        if (y > 1) throw ValueError("the MPCA pipeline expects binary labels");

    TrainReport report;
    report.run_id = out.run_id;
    report.config_text = dump_config(cfg);
    report.epochs = cfg_size(cfg, "SOLVER.MAX_EPOCHS");
    RngStream rng = pipeline_rng(cfg);

    const double val_f = cfg.get_real("DATASET.VAL_FRACTION");
    const double test_f = cfg.get_real("DATASET.TEST_FRACTION");
    const auto split = split_three_way(dataset.size(), {1.0 - val_f - test_f, val_f, test_f}, rng.child(0));
    if (split.test.empty()) throw ValueError("the MPCA pipeline needs a non-empty test split");

    auto gather = [&](const std::vector<std::size_t>& idx) {
        std::vector<Tensor> xs;
        xs.reserve(idx.size());
        for (auto i : idx) xs.push_back(dataset.features[i]);
        return xs;
    };
    auto train_x = gather(split.train), val_x = gather(split.val), test_x = gather(split.test);
    if (cfg.get_bool("MODEL.STANDARDIZE")) {
        const auto st = Standardizer::fit(train_x);
        train_x = st.apply(train_x);
        val_x = st.apply(val_x);
        test_x = st.apply(test_x);
    }

    const auto mpca = MpcaModel::fit(train_x, cfg.get_real("MODEL.VARIANCE_RATIO"), cfg_size(cfg, "MODEL.MAX_ITERS"));
    std::size_t k = cfg_size(cfg, "MODEL.N_FEATURES");
    if (k == 0 || k > mpca.feature_count()) k = mpca.feature_count();

    auto features = [&](const std::vector<Tensor>& xs) {
        FeatureMatrix m;
        m.rows = xs.size();
        m.cols = k;
        m.values.reserve(m.rows * k);
        for (const auto& x : xs) {
            const auto v = mpca.transform_vector(x, k);
            m.values.insert(m.values.end(), v.begin(), v.end());
        }
        return m;
    };
    auto pick = [&](const std::vector<std::size_t>& idx) {
        std::vector<int> y;
        for (auto i : idx) y.push_back(labels[i]);
        return y;
    };
    const auto f_train = features(train_x);
    std::vector<double> y_train;
    for (auto i : split.train) y_train.push_back(dataset.labels[i]);

    LinearFitOptions opts;
    opts.lambda_reg = cfg.get_real("MODEL.LAMBDA_REG");
    opts.epochs = report.epochs;
    opts.lr = cfg.get_real("SOLVER.BASE_LR");
    const auto clf = LinearClassifier::fit(linear_kind_from_string(cfg.get_string("MODEL.CLASSIFIER")), f_train,
                                           y_train, opts, rng.child(1));
    for (std::size_t e = 1; e <= report.epochs; ++e)
        report.records.push_back({out.run_id, e, Split::train, "loss", clf.loss_history()[e]});

    auto eval_split = [&](Split s, const std::vector<Tensor>& xs, const std::vector<std::size_t>& idx) {
        const auto f = features(xs);
        const auto scores = clf.decision_function(f);
        const auto truth = pick(idx);
        const double acc = accuracy(clf.predict(f), truth);
        report.records.push_back({out.run_id, report.epochs, s, "accuracy", acc});
        if (s == Split::test) {
            const double auc = roc_auc(scores, truth);
            report.records.push_back({out.run_id, report.epochs, s, "auc", auc});
            report.final_metrics = {{"accuracy", acc}, {"auc", auc}};
            report.test_outputs = scores;
            report.test_targets.assign(truth.begin(), truth.end());
        } else if (has_both_classes(truth)) {
            report.records.push_back({out.run_id, report.epochs, s, "auc", roc_auc(scores, truth)});
        }
    };
    if (!split.val.empty()) eval_split(Split::val, val_x, split.val);
    eval_split(Split::test, test_x, split.test);

    report.weight_map = weights_to_input_space(mpca, clf);
    const std::size_t top = std::min(cfg_size(cfg, "MODEL.TOP_WEIGHTS"), report.weight_map->weights.size());
    report.wall_seconds = seconds_since(t0);

    if (out.dir) {
        prepare_dir(out);
        write_metrics(out, report.records);
        mpca.save(*out.dir / "mpca");
        clf.save(*out.dir / "classifier");
        export_weight_map(*report.weight_map, *out.dir / "weights.csv", ExportFormat::csv);
        if (top > 0) {
            const WeightMap top_map{select_top_weight(report.weight_map->weights, top),
                                    report.weight_map->provenance + ", top " + std::to_string(top)};
            export_weight_map(top_map, *out.dir / "top_weights.csv", ExportFormat::csv);
            export_weight_map(top_map, *out.dir / "top_weights", ExportFormat::pgm_slices);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Domain adaptation
// ---------------------------------------------------------------------------

Adaptation adaptation_from_string(const std::string& name) {
    if (name == "dann") return Adaptation::dann;
    if (name == "dan_mmd") return Adaptation::dan_mmd;
    if (name == "none") return Adaptation::none;
    throw ValueError("unknown adaptation method '" + name + "' (expected dann, dan_mmd or none)");
}

std::string to_string(Adaptation a) {
    switch (a) {
        case Adaptation::dann: return "dann";
        case Adaptation::dan_mmd: return "dan_mmd";
        case Adaptation::none: return "none";
    }
    return "?";
}

DannConfig DannConfig::from_config(const Config& cfg) {
    DannConfig d;
    d.adaptation = adaptation_from_string(cfg.get_string("MODEL.ADAPTATION"));
    d.lambda_max = cfg.get_real("MODEL.LAMBDA_MAX");
    d.gamma = cfg.get_real("MODEL.GAMMA");
    d.trade_off = cfg.get_real("MODEL.TRADE_OFF");
    d.mmd_bandwidths = cfg.get_real_list("MODEL.MMD_BANDWIDTHS");
    if (d.lambda_max < 0 || d.trade_off < 0) throw ValueError("LAMBDA_MAX and TRADE_OFF must be non-negative");
    return d;
}

double lambda_schedule(double progress, double lambda_max, double gamma) {
    return lambda_max * (2.0 / (1.0 + std::exp(-gamma * progress)) - 1.0);
}

TrainReport run_dann_pipeline(const MultiDomainDataset& md, const Config& cfg, const RunOutput& out) {
    return run_dann_pipeline(md, cfg, out, nullptr);
}

TrainReport run_dann_pipeline(const MultiDomainDataset& md, const Config& cfg, const RunOutput& out,
                              std::optional<DannNets>* nets_out) {
    const auto t0 = Clock::now();
    const DannConfig dc = DannConfig::from_config(cfg);
    TrainReport report;
    report.run_id = out.run_id;
    report.config_text = dump_config(cfg);
    report.epochs = cfg_size(cfg, "SOLVER.MAX_EPOCHS");
    RngStream rng = pipeline_rng(cfg);

    const auto source_labels = to_int_labels(md.source().labels);
    const auto target_labels = to_int_labels(md.target_labels_for_evaluation());
    const std::size_t classes =
        static_cast<std::size_t>(*std::max_element(source_labels.begin(), source_labels.end())) + 1;
    if (classes < 2) throw ValueError("the source domain needs at least two classes");

    const double val_f = cfg.get_real("DATASET.VAL_FRACTION");
    const auto split = split_three_way(md.source().size(), {1.0 - val_f, val_f, 0.0}, rng.child(0));
    Dataset target_ds{"target", md.target_features(), md.target_labels_for_evaluation()};
    const MultiDomainDataset train_md(md.source().subset(split.train), std::move(target_ds));

    const std::size_t in_dim = shape_size(md.feature_shape());
    const std::size_t feat_dim = cfg_size(cfg, "MODEL.FEATURE_DIM");
    nn::Net extractor = build_feature_extractor(
        ExtractorSpec::small_vector_mlp(in_dim, cfg_sizes(cfg, "MODEL.HIDDEN"), feat_dim), rng.child(1));
    nn::Net class_head = build_head(HeadSpec::class_head(feat_dim, classes), rng.child(2));
    nn::Net domain_head =
        build_head(HeadSpec::domain_head(feat_dim, cfg_size(cfg, "MODEL.DOMAIN_HIDDEN")), rng.child(3));

    nn::Optimizer opt(nn::OptimizerSpec::adam(cfg.get_real("SOLVER.BASE_LR")));
    std::vector<nn::Net*> nets{&extractor, &class_head};
    if (dc.adaptation == Adaptation::dann) nets.push_back(&domain_head);

    const std::size_t batch_size = cfg_size(cfg, "SOLVER.TRAIN_BATCH_SIZE");
    std::vector<DomainBatch> batches;
    std::size_t step = 0, total_steps = 0;
    const nn::LossSpec ce{nn::LossKind::softmax_cross_entropy};

    TrainerHooks hooks;
    hooks.begin_epoch = [&](std::size_t, RngStream& r) {
        batches = paired_domain_batches(train_md, batch_size, r);
        total_steps = batches.size() * report.epochs;
        return batches.size();
    };
    hooks.train_batch = [&](std::size_t, std::size_t b) {
        const auto& batch = batches[b];
        const auto src = extractor.forward(flatten_batch(batch.source_features));
        const auto logits = class_head.forward(src.output());
        const auto cls = nn::compute_loss(ce, logits.output(), vector_tensor(batch.source_labels));
        Tensor g_src = class_head.backward(logits, cls.grad);
        double loss = cls.value;
        const double progress = static_cast<double>(step++) / static_cast<double>(total_steps);

        if (dc.adaptation == Adaptation::none) {
            extractor.backward(src, g_src);
            return loss;
        }
        const auto tgt = extractor.forward(flatten_batch(batch.target_features));
        const std::size_t ns = src.output().dim(0);
        if (dc.adaptation == Adaptation::dann) {
            const Tensor both = concat_rows(src.output(), tgt.output());
            std::vector<double> dom(both.dim(0), 1.0);
            std::fill_n(dom.begin(), ns, 0.0);
            const auto dom_acts = domain_head.forward(both);
            auto dl = nn::compute_loss(ce, dom_acts.output(), vector_tensor(dom));
            dl.grad *= dc.trade_off;
            loss += dc.trade_off * dl.value;
            // Gradient reversal between the extractor and the domain head.
            Tensor g_both = domain_head.backward(dom_acts, dl.grad);
            g_both *= -lambda_schedule(progress, dc.lambda_max, dc.gamma);
            auto [g_s, g_t] = split_rows(g_both, ns);
            g_src += g_s;
            extractor.backward(src, g_src);
            extractor.backward(tgt, g_t);
        } else {
            const auto mmd = nn::mmd_rbf(src.output(), tgt.output(), dc.mmd_bandwidths);
            loss += dc.trade_off * mmd.value;
            g_src += dc.trade_off * mmd.grad_x;
            extractor.backward(src, g_src);
            extractor.backward(tgt, dc.trade_off * mmd.grad_y);
        }
        return loss;
    };

    const Tensor val_x = split.val.empty() ? Tensor() : flatten_batch(md.source().stack(split.val));
    std::vector<int> val_y;
    for (auto i : split.val) val_y.push_back(source_labels[i]);
    std::vector<std::size_t> all_target(md.target_size());
    for (std::size_t i = 0; i < all_target.size(); ++i) all_target[i] = i;
    const Tensor target_x = flatten_batch(stack_features(md.target_features(), all_target));

    auto predict = [&](const Tensor& x) {
        return argmax_rows(class_head.forward(extractor.forward(x).output()).output());
    };
    auto evaluate = [&](std::size_t epoch) {
        std::vector<MetricRecord> recs;
        if (!val_y.empty()) {
            recs.push_back({out.run_id, epoch, Split::val, "source_accuracy", accuracy(predict(val_x), val_y)});
        }
        // Oracle reporting: target labels are read here and nowhere in training.
        const auto pred = predict(target_x);
        recs.push_back({out.run_id, epoch, Split::test, "target_accuracy", accuracy(pred, target_labels)});
        report.test_outputs.assign(pred.begin(), pred.end());
        report.test_targets.assign(target_labels.begin(), target_labels.end());
        return recs;
    };
    hooks.evaluate = evaluate;

    report.records = trainer_loop(nets, opt, report.epochs, rng.child(4), hooks, out.run_id);
    if (report.epochs == 0) report.records = evaluate(0);
    for (auto it = report.records.rbegin(); it != report.records.rend(); ++it) {
        if (it->epoch != report.epochs) break;
        if (it->split != Split::train) report.final_metrics.insert(report.final_metrics.begin(), {it->metric, it->value});
    }
    report.wall_seconds = seconds_since(t0);

    if (out.dir) {
        prepare_dir(out);
        write_metrics(out, report.records);
        nn::save_net(extractor, *out.dir / "extractor");
        nn::save_net(class_head, *out.dir / "class_head");
        if (dc.adaptation == Adaptation::dann) nn::save_net(domain_head, *out.dir / "domain_head");
    }
    if (nets_out) nets_out->emplace(DannNets{std::move(extractor), std::move(class_head), std::move(domain_head)});
    return report;
}

// ---------------------------------------------------------------------------
// DeepDTA
// ---------------------------------------------------------------------------

TrainReport run_deepdta_pipeline(const SequencePairDataset& data, const Config& cfg, const RunOutput& out) {
    const auto t0 = Clock::now();
    const std::size_t n = data.size();
    if (data.drugs.size() != n || data.targets.size() != n) throw ShapeError("drug/target/affinity counts differ");
    if (n < 2) throw ValueError("the DeepDTA pipeline needs at least 2 pairs");

    TrainReport report;
    report.run_id = out.run_id;
    report.config_text = dump_config(cfg);
    report.epochs = cfg_size(cfg, "SOLVER.MAX_EPOCHS");
    RngStream rng = pipeline_rng(cfg);

    const SequenceEncoding drug_enc(std::string(kDrugAlphabet), cfg_size(cfg, "DATASET.DRUG_MAX_LEN"));
    const SequenceEncoding target_enc(std::string(kTargetAlphabet), cfg_size(cfg, "DATASET.TARGET_MAX_LEN"));
    const std::size_t ld = drug_enc.max_len(), lt = target_enc.max_len();
    std::vector<double> drug_codes(n * ld), target_codes(n * lt);
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = drug_enc.encode(data.drugs[i]);
        const auto t = target_enc.encode(data.targets[i]);
        std::copy(d.begin(), d.end(), drug_codes.begin() + static_cast<std::ptrdiff_t>(i * ld));
        std::copy(t.begin(), t.end(), target_codes.begin() + static_cast<std::ptrdiff_t>(i * lt));
    }
    auto rows = [](const std::vector<double>& codes, std::size_t len, std::span<const std::size_t> idx) {
        Tensor out({idx.size(), len});
        for (std::size_t r = 0; r < idx.size(); ++r)
            std::copy_n(codes.data() + idx[r] * len, len, out.data().data() + r * len);
        return out;
    };
    auto affinities = [&](std::span<const std::size_t> idx) {
        Tensor y({idx.size(), 1});
        for (std::size_t r = 0; r < idx.size(); ++r) y[r] = data.affinities[idx[r]];
        return y;
    };

    const double nd = static_cast<double>(n);
    const auto split = split_three_way(
        n,
        {1.0 - (static_cast<double>(cfg_size(cfg, "DATASET.VAL_SIZE")) + static_cast<double>(cfg_size(cfg, "DATASET.TEST_SIZE"))) / nd,
         static_cast<double>(cfg_size(cfg, "DATASET.VAL_SIZE")) / nd,
         static_cast<double>(cfg_size(cfg, "DATASET.TEST_SIZE")) / nd},
        rng.child(0));
    if (split.test.empty()) throw ValueError("the DeepDTA pipeline needs a non-empty test split");

    nn::Net drug_net = build_feature_extractor(
        ExtractorSpec::sequence_cnn(drug_enc.vocab_size(), ld, cfg_size(cfg, "MODEL.DRUG_EMBEDDING_DIM"),
                                    cfg_sizes(cfg, "MODEL.DRUG_FILTERS"), cfg_sizes(cfg, "MODEL.DRUG_KERNELS")),
        rng.child(1));
    nn::Net target_net = build_feature_extractor(
        ExtractorSpec::sequence_cnn(target_enc.vocab_size(), lt, cfg_size(cfg, "MODEL.TARGET_EMBEDDING_DIM"),
                                    cfg_sizes(cfg, "MODEL.TARGET_FILTERS"), cfg_sizes(cfg, "MODEL.TARGET_KERNELS")),
        rng.child(2));
    const std::size_t fd = drug_net.output_shape().at(0), ft = target_net.output_shape().at(0);
    nn::Net decoder = build_head(HeadSpec::mlp_decoder(fd + ft, cfg_sizes(cfg, "MODEL.DECODER_HIDDEN")), rng.child(3));

    nn::Optimizer opt(nn::OptimizerSpec::adam(cfg.get_real("SOLVER.BASE_LR")));
    nn::Net* nets[] = {&drug_net, &target_net, &decoder};
    const std::size_t batch_size = cfg_size(cfg, "SOLVER.TRAIN_BATCH_SIZE");
    if (batch_size == 0) throw ValueError("SOLVER.TRAIN_BATCH_SIZE must be positive");
    const nn::LossSpec mse{nn::LossKind::mse};

    auto predict = [&](std::span<const std::size_t> idx) {
        std::vector<double> pred;
        pred.reserve(idx.size());
        constexpr std::size_t chunk = 128;
        for (std::size_t s = 0; s < idx.size(); s += chunk) {
            const auto part = idx.subspan(s, std::min(chunk, idx.size() - s));
            const auto z = concat_columns(drug_net.forward(rows(drug_codes, ld, part)).output(),
                                          target_net.forward(rows(target_codes, lt, part)).output());
            const auto y = decoder.forward(z).output();
            pred.insert(pred.end(), y.data().begin(), y.data().end());
        }
        return pred;
    };
    auto eval_records = [&](Split s, std::span<const std::size_t> idx, std::size_t epoch) {
        const auto pred = predict(idx);
        const auto truth = affinities(idx);
        const double m = nn::compute_loss(mse, Tensor({pred.size(), 1}, pred), truth).value;
        const double ci = concordance_index(pred, truth.data());
        if (s == Split::test) {
            report.test_outputs = pred;
            report.test_targets = truth.values();
            report.final_metrics = {{"mse", m}, {"ci", ci}};
        }
        return std::vector<MetricRecord>{{out.run_id, epoch, s, "mse", m}, {out.run_id, epoch, s, "ci", ci}};
    };

    std::vector<std::size_t> order;
    TrainerHooks hooks;
    hooks.begin_epoch = [&](std::size_t, RngStream& r) {
        order = split.train;
        r.shuffle(order);
        return (order.size() + batch_size - 1) / batch_size;
    };
    hooks.train_batch = [&](std::size_t, std::size_t b) {
        const auto idx = std::span<const std::size_t>(order).subspan(b * batch_size,
                                                                     std::min(batch_size, order.size() - b * batch_size));
        const auto da = drug_net.forward(rows(drug_codes, ld, idx));
        const auto ta = target_net.forward(rows(target_codes, lt, idx));
        const auto dec = decoder.forward(concat_columns(da.output(), ta.output()));
        const auto l = nn::compute_loss(mse, dec.output(), affinities(idx));
        const auto [gd, gt] = split_columns(decoder.backward(dec, l.grad), fd);
        drug_net.backward(da, gd);
        target_net.backward(ta, gt);
        return l.value;
    };
    if (!split.val.empty()) hooks.evaluate = [&](std::size_t e) { return eval_records(Split::val, split.val, e); };

    report.records = trainer_loop(nets, opt, report.epochs, rng.child(4), hooks, out.run_id);
    const auto test = eval_records(Split::test, split.test, report.epochs);
    report.records.insert(report.records.end(), test.begin(), test.end());
    report.wall_seconds = seconds_since(t0);

    if (out.dir) {
        prepare_dir(out);
        write_metrics(out, report.records);
        nn::save_net(drug_net, *out.dir / "drug_encoder");
        nn::save_net(target_net, *out.dir / "target_encoder");
        nn::save_net(decoder, *out.dir / "decoder");
    }
    return report;
}

TrainReport run_pipeline(std::string_view subcommand, const Config& cfg, const RunOutput& out) {
    const std::string& name = cfg.get_string("DATASET.NAME");
    if (subcommand == "mpca") {
        if (name != "tensor_patterns") throw ValueError("mpca supports DATASET.NAME tensor_patterns, got '" + name + "'");
        return run_mpca_pipeline(generate_tensor_patterns(tensor_pattern_params(cfg), data_rng(cfg)), cfg, out);
    }
    if (subcommand == "dann") {
        if (name != "domain_shift_blobs") {
            throw ValueError("dann supports DATASET.NAME domain_shift_blobs, got '" + name + "'");
        }
        return run_dann_pipeline(generate_domain_shift_blobs(blob_params(cfg), data_rng(cfg)), cfg, out);
    }
    if (subcommand == "deepdta") {
        if (name != "dta_strings") throw ValueError("deepdta supports DATASET.NAME dta_strings, got '" + name + "'");
        return run_deepdta_pipeline(generate_dta_strings(dta_params(cfg), data_rng(cfg)), cfg, out);
    }
    throw ValueError("unknown subcommand '" + std::string(subcommand) + "'");
}

}  // namespace kale
