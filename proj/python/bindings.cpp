#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "kale/cli.hpp"
#include "kale/config.hpp"
#include "kale/embed.hpp"
#include "kale/errors.hpp"
#include "kale/evaluate.hpp"
#include "kale/interpret.hpp"
#include "kale/nn.hpp"
#include "kale/pipeline.hpp"
#include "kale/rng.hpp"

namespace py = pybind11;
using namespace kale;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
    Shape shape(a.shape(), a.shape() + a.ndim());
    return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
    Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

// (n, ...) array -> n tensors of shape (...).
std::vector<Tensor> to_samples(const Array& a) {
    if (a.ndim() < 2) throw ShapeError("samples need a leading sample axis");
    const Shape shape(a.shape() + 1, a.shape() + a.ndim());
    const std::size_t per = shape_size(shape);
    std::vector<Tensor> xs;
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        xs.emplace_back(shape, std::vector<double>(a.data() + i * per, a.data() + (i + 1) * per));
    return xs;
}

Config resolve(const std::string& subcommand, std::optional<std::string> overlay,
               const std::vector<Override>& overrides) {
    std::optional<std::string_view> view;
    if (overlay) view = *overlay;
    return resolve_config(default_config(subcommand), view, overrides);
}

py::dict report_dict(const TrainReport& r) {
    py::dict d;
    d["run_id"] = r.run_id;
    d["epochs"] = r.epochs;
    py::dict metrics;
    for (const auto& m : r.final_metrics) metrics[py::str(m.name)] = m.value;
    d["final_metrics"] = metrics;
    py::list records;
    for (const auto& rec : r.records)
        records.append(py::make_tuple(rec.epoch, std::string(to_string(rec.split)), rec.metric, rec.value));
    d["records"] = records;
    d["test_outputs"] = r.test_outputs;
    d["test_targets"] = r.test_targets;
    d["weight_map"] = r.weight_map ? py::object(to_array(r.weight_map->weights)) : py::none();
    d["wall_seconds"] = r.wall_seconds;
    d["config"] = r.config_text;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pipeline stages: MPCA, domain adaptation, sequence affinity regression";

    auto base = py::register_exception<Error>(m, "KaleError", PyExc_RuntimeError);
    py::register_exception<SchemaError>(m, "SchemaError", base);
    py::register_exception<ConfigTypeError>(m, "ConfigTypeError", base);
    py::register_exception<ParseError>(m, "ParseError", base);
    py::register_exception<ShapeError>(m, "ShapeError", base);
    py::register_exception<ValueError>(m, "ValueError", base);
    py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base);
    py::register_exception<NonFiniteError>(m, "NonFiniteError", base);

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def_property_readonly("seed", &RngStream::seed)
        .def("next_u64", &RngStream::next_u64)
        .def("uniform", py::overload_cast<>(&RngStream::uniform))
        .def("normal", &RngStream::normal)
        .def("below", &RngStream::below, py::arg("n"))
        .def("child", &RngStream::child, py::arg("index"))
        .def("permutation", &RngStream::permutation, py::arg("n"));
    m.def("set_seed", &set_seed, py::arg("seed"));

    // config
    m.def("default_config", [](const std::string& sub) { return dump_config(default_config(sub)); },
          py::arg("subcommand"), "Canonical YAML of a subcommand's defaults.");
    m.def(
        "resolve_config",
        [](const std::string& sub, std::optional<std::string> overlay, const std::vector<Override>& overrides) {
            return dump_config(resolve(sub, overlay, overrides));
        },
        py::arg("subcommand"), py::arg("overlay") = py::none(), py::arg("overrides") = std::vector<Override>{});
    m.def("run_id", [](const std::string& sub, std::optional<std::string> overlay,
                       const std::vector<Override>& overrides) { return make_run_id(resolve(sub, overlay, overrides)); },
          py::arg("subcommand"), py::arg("overlay") = py::none(), py::arg("overrides") = std::vector<Override>{});

    // pipelines
    m.def(
        "run_pipeline",
        [](const std::string& sub, std::optional<std::string> overlay, const std::vector<Override>& overrides,
           std::optional<std::filesystem::path> out_dir) {
            const auto cfg = resolve(sub, overlay, overrides);
            RunOutput out;
            out.run_id = make_run_id(cfg);
            if (out_dir) out.dir = *out_dir / out.run_id;
            TrainReport r;
            {
                py::gil_scoped_release release;
                r = run_pipeline(sub, cfg, out);
            }
            return report_dict(r);
        },
        py::arg("subcommand"), py::arg("overlay") = py::none(), py::arg("overrides") = std::vector<Override>{},
        py::arg("out_dir") = py::none());
    m.def("lambda_schedule", &lambda_schedule, py::arg("progress"), py::arg("lambda_max") = 1.0,
          py::arg("gamma") = 10.0);

    m.def(
        "cli_main",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "kale");
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::main_with_args(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the CLI; returns (exit_code, stdout, stderr).");

    // embed
    py::class_<MpcaModel>(m, "MpcaModel")
        .def_property_readonly("projected_shape", &MpcaModel::projected_shape)
        .def_property_readonly("sample_shape", &MpcaModel::sample_shape)
        .def_property_readonly("mean", [](const MpcaModel& s) { return to_array(s.mean()); })
        .def_property_readonly("projections",
                               [](const MpcaModel& s) {
                                   py::list out;
                                   for (const auto& u : s.projections()) out.append(to_array(u.to_tensor()));
                                   return out;
                               })
        .def_property_readonly("feature_order", &MpcaModel::feature_order)
        .def_property_readonly("feature_variances", &MpcaModel::feature_variances)
        .def("transform", [](const MpcaModel& s, const Array& x) { return to_array(s.transform(to_tensor(x))); })
        .def("transform_vector",
             [](const MpcaModel& s, const Array& x, std::optional<std::size_t> k) {
                 return s.transform_vector(to_tensor(x), k);
             },
             py::arg("x"), py::arg("n_features") = py::none())
        .def("inverse_transform",
             [](const MpcaModel& s, const Array& y) { return to_array(s.inverse_transform(to_tensor(y))); })
        .def("save", &MpcaModel::save)
        .def_static("load", &MpcaModel::load);
    m.def(
        "mpca_fit",
        [](const Array& samples, double q, std::size_t iters) { return mpca_fit(to_samples(samples), q, iters); },
        py::arg("samples"), py::arg("variance_ratio"), py::arg("max_iters") = 1,
        "Fits MPCA on an (n, I1, ..., IN) array.");

    // evaluate
    m.def("accuracy", [](const std::vector<int>& p, const std::vector<int>& t) { return accuracy(p, t); },
          py::arg("pred"), py::arg("truth"));
    m.def("roc_auc", [](const std::vector<double>& s, const std::vector<int>& y) { return roc_auc(s, y); },
          py::arg("scores"), py::arg("labels"));
    m.def("concordance_index",
          [](const std::vector<double>& p, const std::vector<double>& o) { return concordance_index(p, o); },
          py::arg("predicted"), py::arg("observed"));

    // interpret
    m.def("select_top_weight",
          [](const Array& w, std::size_t k) { return to_array(select_top_weight(to_tensor(w), k)); },
          py::arg("weights"), py::arg("count"));
    m.def("select_top_weight_fraction",
          [](const Array& w, double f) { return to_array(select_top_weight(to_tensor(w), f)); },
          py::arg("weights"), py::arg("fraction"));

    // nnkernel
    m.def(
        "mmd_rbf",
        [](const Array& x, const Array& y, const std::vector<double>& bw) {
            const auto r = nn::mmd_rbf(to_tensor(x), to_tensor(y), bw);
            return py::make_tuple(r.value, to_array(r.grad_x), to_array(r.grad_y));
        },
        py::arg("x"), py::arg("y"), py::arg("bandwidths"), "Returns (value, grad_x, grad_y).");
}
