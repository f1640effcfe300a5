#include "kale/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "kale/errors.hpp"
#include "kale/metrics_log.hpp"

namespace kale {

Tensor select_top_weight(const Tensor& weights, std::size_t count) {
    const std::size_t n = weights.size();
    if (count == 0) throw ValueError("select_top_weight needs k >= 1");
    if (count > n) {
        throw ValueError("select_top_weight: k = " + std::to_string(count) + " exceeds " + std::to_string(n) +
                         " entries");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(weights[a]) > std::abs(weights[b]); });
    Tensor out(weights.shape());
    for (std::size_t i = 0; i < count; ++i) out[idx[i]] = weights[idx[i]];
    return out;
}

Tensor select_top_weight(const Tensor& weights, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ValueError("select_top_weight fraction must lie in (0, 1]");
    const double k = std::ceil(fraction * static_cast<double>(weights.size()) - 1e-9);
    return select_top_weight(weights, std::max<std::size_t>(1, static_cast<std::size_t>(k)));
}

WeightMap weights_to_input_space(const MpcaModel& mpca, const LinearClassifier& clf) {
    const auto& w = clf.weights();
    if (w.size() > mpca.feature_count()) {
        throw ShapeError("classifier has " + std::to_string(w.size()) + " weights, MPCA yields " +
                         std::to_string(mpca.feature_count()) + " features");
    }
    WeightMap map;
    map.weights = mpca.inverse_transform_vector(w) - mpca.mean();
    map.provenance = to_string(clf.kind()) + " on " + std::to_string(w.size()) + " MPCA features, class 1";
    return map;
}

namespace {

void write_csv(const Tensor& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "flat_index,index,value\n";
    const Shape& shape = t.shape();
    std::vector<std::size_t> coord(shape.size(), 0);
    for (std::size_t f = 0; f < t.size(); ++f) {
        out << f << ',';
        for (std::size_t d = 0; d < coord.size(); ++d) out << (d ? ":" : "") << coord[d];
        out << ',' << format_metric_value(t[f]) << '\n';
        for (std::size_t d = coord.size(); d-- > 0;) {
            if (++coord[d] < shape[d]) break;
            coord[d] = 0;
        }
    }
    if (!out) throw IoError("write failed for " + path.string());
}

void write_pgm(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
               const std::vector<unsigned char>& pixels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << cols << ' ' << rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void write_pgm_slices(const Tensor& t, const std::filesystem::path& path) {
    if (t.size() == 0) throw ValueError("cannot export an empty weight map");
    const auto [lo_it, hi_it] = std::minmax_element(t.data().begin(), t.data().end());
    const double lo = *lo_it, hi = *hi_it;
    auto pixel = [&](double v) -> unsigned char {
        if (!(hi > lo)) return 128;
        return static_cast<unsigned char>(std::lround(255.0 * (v - lo) / (hi - lo)));
    };
    const Shape& shape = t.shape();
    if (shape.size() <= 2) {
        const std::size_t rows = shape.size() == 2 ? shape[0] : 1;
        std::vector<unsigned char> px(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) px[i] = pixel(t[i]);
        write_pgm(path, rows, t.size() / rows, px);
        return;
    }
    const std::size_t slices = shape.back();
    const std::size_t cols = shape[shape.size() - 2];
    const std::size_t rows = t.size() / (slices * cols);
    for (std::size_t k = 0; k < slices; ++k) {
        std::vector<unsigned char> px(rows * cols);
        for (std::size_t i = 0; i < rows * cols; ++i) px[i] = pixel(t[i * slices + k]);
        write_pgm(path.string() + "_slice" + std::to_string(k) + ".pgm", rows, cols, px);
    }
}

}  // namespace

void export_weight_map(const WeightMap& map, const std::filesystem::path& path, ExportFormat format) {
    if (format == ExportFormat::csv) write_csv(map.weights, path);
    else write_pgm_slices(map.weights, path);
}

}  // namespace kale
