#include "kale/loaddata.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kale/errors.hpp"

namespace kale {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

constexpr std::size_t kHeaderSize = 7;

}  // namespace

std::string encode_ktf(const Tensor& t) {
    if (t.order() > 255) throw ShapeError("KTF supports tensors of order at most 255");
    std::string out(kKtfMagic.begin(), kKtfMagic.end());
    out.push_back(static_cast<char>(kKtfVersion));
    out.push_back(static_cast<char>(kKtfDtypeReal64));
    out.push_back(static_cast<char>(t.order()));
    for (auto d : t.shape()) put_u64(out, d);
    out.reserve(out.size() + 8 * t.size());
    for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

Tensor decode_ktf(std::string_view bytes) {
    if (bytes.size() < 4 || !std::equal(kKtfMagic.begin(), kKtfMagic.end(), bytes.begin())) {
        throw FormatError("not a KTF file (bad magic)");
    }
    if (bytes.size() < kHeaderSize) throw TruncationError("KTF header truncated");
    const auto version = static_cast<unsigned char>(bytes[4]);
    const auto dtype = static_cast<unsigned char>(bytes[5]);
    const auto order = static_cast<unsigned char>(bytes[6]);
    if (version != kKtfVersion) throw UnsupportedError("unsupported KTF version " + std::to_string(version));
    if (dtype != kKtfDtypeReal64) throw UnsupportedError("unsupported KTF dtype " + std::to_string(dtype));

    std::size_t pos = kHeaderSize;
    if (bytes.size() < pos + 8 * static_cast<std::size_t>(order)) throw TruncationError("KTF shape block truncated");
    Shape shape(order);
    std::size_t count = 1;
    for (auto& d : shape) {
        d = get_u64(bytes.data() + pos);
        pos += 8;
        if (d != 0 && count > (std::size_t{1} << 60) / d) throw FormatError("KTF shape too large");
        count *= d;
    }
    const std::size_t available = (bytes.size() - pos) / 8;
    if (available < count) {
        throw TruncationError("KTF payload truncated: shape " + shape_to_string(shape) + " needs " +
                              std::to_string(count) + " values, file holds " + std::to_string(available));
    }
    if (bytes.size() != pos + 8 * count) throw FormatError("KTF file has trailing bytes");
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i, pos += 8) data[i] = std::bit_cast<double>(get_u64(bytes.data() + pos));
    return Tensor(std::move(shape), std::move(data));
}

void save_ktf(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    const auto bytes = encode_ktf(t);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Tensor load_ktf(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_ktf(ss.str());
}

void Dataset::validate() const {
    if (features.size() != labels.size()) {
        throw ShapeError("dataset '" + name + "' has " + std::to_string(features.size()) + " samples but " +
                         std::to_string(labels.size()) + " labels");
    }
    for (const auto& f : features)
        if (f.shape() != features.front().shape()) throw ShapeError("dataset '" + name + "' has ragged features");
}

Tensor Dataset::stack(std::span<const std::size_t> indices) const { return stack_features(features, indices); }

Tensor stack_features(std::span<const Tensor> features, std::span<const std::size_t> indices) {
    if (features.empty()) throw ShapeError("cannot stack an empty feature list");
    const auto& sample_shape = features.front().shape();
    Shape shape{indices.size()};
    shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
    Tensor out(shape);
    const std::size_t stride = shape_size(sample_shape);
    for (std::size_t b = 0; b < indices.size(); ++b) {
        if (indices[b] >= features.size()) throw ShapeError("sample index out of range");
        const auto src = features[indices[b]].data();
        std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(b * stride));
    }
    return out;
}

std::vector<double> Dataset::gather_labels(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(labels.at(i));
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset d{name, {}, {}};
    d.features.reserve(indices.size());
    d.labels.reserve(indices.size());
    for (auto i : indices) {
        d.features.push_back(features.at(i));
        d.labels.push_back(labels.at(i));
    }
    return d;
}

MultiDomainDataset::MultiDomainDataset(Dataset source, Dataset target)
    : source_(std::move(source)),
      target_features_(std::move(target.features)),
      target_labels_(std::move(target.labels)) {
    source_.validate();
    if (source_.features.empty() || target_features_.empty()) throw ShapeError("both domains need samples");
    if (target_labels_.size() != target_features_.size()) throw ShapeError("target label count mismatch");
    for (const auto& f : target_features_)
        if (f.shape() != feature_shape()) throw ShapeError("source and target feature shapes differ");
}

SplitIndices split_three_way(std::size_t n, SplitFractions fractions, RngStream rng) {
    if (n < 2) throw ValueError("split needs at least 2 samples");
    const double sum = fractions.train + fractions.val + fractions.test;
    if (!(fractions.train > 0 && fractions.val >= 0 && fractions.test >= 0) || std::abs(sum - 1.0) > 1e-9) {
        throw ValueError("split fractions must be non-negative, with a positive train share, and sum to 1");
    }
    // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
    const auto floor_count = [n](double f) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + 1e-9));
    };
    const std::size_t n_val = floor_count(fractions.val);
    const std::size_t n_test = floor_count(fractions.test);
    if (n_val + n_test >= n) throw ValueError("split leaves no training samples");
    const std::size_t n_train = n - n_val - n_test;

    const auto perm = rng.permutation(n);
    SplitIndices s;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                 perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
    return s;
}

Dataset load_csv_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("CSV file is empty: " + path.string());
    const auto n_cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (n_cols < 2) throw FormatError("CSV needs at least one feature column and a label column");

    Dataset d{path.stem().string(), {}, {}};
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw FormatError("non-numeric CSV cell '" + cell + "' at row " + std::to_string(row));
            }
        }
        if (values.size() != n_cols) {
            throw FormatError("CSV row " + std::to_string(row) + " has " + std::to_string(values.size()) +
                              " columns, header has " + std::to_string(n_cols));
        }
        d.labels.push_back(values.back());
        values.pop_back();
        d.features.emplace_back(Shape{n_cols - 1}, std::move(values));
    }
    return d;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept {
    if (needle.empty() || haystack.size() < needle.size()) return 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i)
        if (haystack.compare(i, needle.size(), needle) == 0) ++count;
    return count;
}

MultiDomainDataset generate_domain_shift_blobs(const BlobParams& p, RngStream rng) {
    if (p.n_per_class == 0 || p.centers.size() < 2 || !(p.noise >= 0)) throw ValueError("invalid blob parameters");
    const double theta = p.rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);

    auto draw = [&](RngStream r, bool shifted, const std::string& name) {
        Dataset d{name, {}, {}};
        for (std::size_t k = 0; k < p.centers.size(); ++k)
            for (std::size_t i = 0; i < p.n_per_class; ++i) {
                double x = p.centers[k][0] + p.noise * r.normal();
                double y = p.centers[k][1] + p.noise * r.normal();
                if (shifted) {
                    const double xr = c * x - s * y, yr = s * x + c * y;
                    x = xr + p.translation[0];
                    y = yr + p.translation[1];
                }
                d.features.emplace_back(Shape{2}, std::vector<double>{x, y});
                d.labels.push_back(static_cast<double>(k));
            }
        return d;
    };
    return MultiDomainDataset(draw(rng.child(0), false, "blobs-source"), draw(rng.child(1), true, "blobs-target"));
}

SequencePairDataset generate_dta_strings(const DtaParams& p, RngStream rng) {
    if (p.n == 0 || p.drug_max_len < 2 || p.target_max_len < 3 || !(p.noise >= 0)) {
        throw ValueError("invalid dta_strings parameters");
    }
    auto random_string = [](RngStream& r, std::string_view alphabet, std::size_t max_len, std::string_view motif,
                            std::size_t max_motifs) {
        const std::size_t min_len = std::max(max_len / 2, motif.size());
        const std::size_t len = min_len + r.below(max_len - min_len + 1);
        std::string s(len, ' ');
        for (auto& ch : s) ch = alphabet[r.below(alphabet.size())];
        const auto planted = r.below(max_motifs + 1);
        for (std::uint64_t m = 0; m < planted; ++m) {
            const auto pos = r.below(len - motif.size() + 1);
            s.replace(pos, motif.size(), motif);
        }
        return s;
    };

    SequencePairDataset d{"dta-strings", {}, {}, {}};
    auto drug_rng = rng.child(0), target_rng = rng.child(1), noise_rng = rng.child(2);
    for (std::size_t i = 0; i < p.n; ++i) {
        auto drug = random_string(drug_rng, kDrugAlphabet, p.drug_max_len, "AB", p.max_planted_motifs);
        auto target = random_string(target_rng, kTargetAlphabet, p.target_max_len, "LMN", p.max_planted_motifs);
        const double y = static_cast<double>(count_occurrences(drug, "AB") + count_occurrences(target, "LMN")) +
                         p.noise * noise_rng.normal();
        d.drugs.push_back(std::move(drug));
        d.targets.push_back(std::move(target));
        d.affinities.push_back(y);
    }
    return d;
}

Dataset generate_tensor_patterns(const TensorPatternParams& p, RngStream rng) {
    if (p.n_per_class == 0 || p.shape.size() != p.block_shape.size() || p.shape.size() != p.block_offset.size()) {
        throw ValueError("invalid tensor_patterns parameters");
    }
    for (std::size_t m = 0; m < p.shape.size(); ++m)
        if (p.shape[m] == 0 || p.block_offset[m] + p.block_shape[m] > p.shape[m]) {
            throw ValueError("planted block does not fit in mode " + std::to_string(m));
        }

    // Flat indices of the planted block.
    std::vector<std::size_t> block;
    const Tensor probe(p.shape);
    std::vector<std::size_t> idx(p.shape.size());
    for (std::size_t k = 0; k < shape_size(p.block_shape); ++k) {
        std::size_t rem = k;
        for (std::size_t m = p.shape.size(); m-- > 0;) {
            idx[m] = p.block_offset[m] + rem % p.block_shape[m];
            rem /= p.block_shape[m];
        }
        block.push_back(probe.flat_index(idx));
    }

    Dataset d{"tensor-patterns", {}, {}};
    for (int cls = 0; cls < 2; ++cls) {
        auto r = rng.child(static_cast<std::uint64_t>(cls));
        for (std::size_t i = 0; i < p.n_per_class; ++i) {
            Tensor x(p.shape);
            for (auto& v : x.data()) v = p.noise * r.normal();
            if (cls == 1)
                for (auto f : block) x[f] += p.mu;
            d.features.push_back(std::move(x));
            d.labels.push_back(cls);
        }
    }
    return d;
}

SyntheticData generate_synthetic(const SyntheticParams& params, RngStream rng) {
    return std::visit(
        [&](const auto& p) -> SyntheticData {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BlobParams>) {
                return generate_domain_shift_blobs(p, rng);
            } else if constexpr (std::is_same_v<T, DtaParams>) {
                return generate_dta_strings(p, rng);
            } else {
                return generate_tensor_patterns(p, rng);
            }
        },
        params);
}

std::vector<DomainBatch> paired_domain_batches(const MultiDomainDataset& md, std::size_t batch_size,
                                               RngStream& rng) {
    const std::size_t ns = md.source().size(), nt = md.target_size();
    if (batch_size == 0) throw ValueError("batch size must be positive");
    if (batch_size > ns || batch_size > nt) {
        throw ValueError("batch size " + std::to_string(batch_size) + " exceeds a domain size (source " +
                         std::to_string(ns) + ", target " + std::to_string(nt) + ")");
    }
    const std::size_t n_batches = std::max(ns, nt) / batch_size;
    auto order_for = [&](std::size_t n) {
        std::vector<std::size_t> order;
        order.reserve(n_batches * batch_size);
        while (order.size() < n_batches * batch_size) {
            const auto perm = rng.permutation(n);
            order.insert(order.end(), perm.begin(), perm.end());
        }
        order.resize(n_batches * batch_size);
        return order;
    };
    const auto src_order = order_for(ns);
    const auto tgt_order = order_for(nt);

    std::vector<DomainBatch> batches(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        auto& batch = batches[b];
        const auto first = static_cast<std::ptrdiff_t>(b * batch_size);
        const auto last = first + static_cast<std::ptrdiff_t>(batch_size);
        batch.source_indices.assign(src_order.begin() + first, src_order.begin() + last);
        batch.target_indices.assign(tgt_order.begin() + first, tgt_order.begin() + last);
        batch.source_features = md.source().stack(batch.source_indices);
        batch.source_labels = md.source().gather_labels(batch.source_indices);
        batch.target_features = stack_features(md.target_features(), batch.target_indices);
    }
    return batches;
}

}  // namespace kale
