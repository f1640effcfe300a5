#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <string>
#include <variant>
#include <vector>

#include "kale/rng.hpp"
#include "kale/tensor.hpp"

namespace kale {

// ---------------------------------------------------------------------------
// KTF tensor files
//
//   bytes 0..3   magic "KALE"
//   byte  4      version (1)
//   byte  5      dtype (0 = real64)
//   byte  6      order N
//   then         N x uint64 little-endian shape values
//   then         prod(shape) x float64 little-endian, row-major
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> kKtfMagic{'K', 'A', 'L', 'E'};
inline constexpr unsigned char kKtfVersion = 1;
inline constexpr unsigned char kKtfDtypeReal64 = 0;

std::string encode_ktf(const Tensor& t);
/// Throws FormatError (bad magic), UnsupportedError (version or dtype) or
/// TruncationError (header or payload shorter than declared).
Tensor decode_ktf(std::string_view bytes);

void save_ktf(const std::filesystem::path& path, const Tensor& t);
Tensor load_ktf(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Indexed (feature tensor, label) pairs. Labels are class indices stored as
/// reals, or real-valued targets.
struct Dataset {
    std::string name;
    std::vector<Tensor> features;
    std::vector<double> labels;

    std::size_t size() const noexcept { return features.size(); }
    /// Throws ShapeError on ragged features or a label count mismatch.
    void validate() const;
    /// Stacks the selected samples into one (batch, ...) tensor.
    Tensor stack(std::span<const std::size_t> indices) const;
    std::vector<double> gather_labels(std::span<const std::size_t> indices) const;
    Dataset subset(std::span<const std::size_t> indices) const;
};

/// Stacks the selected tensors (all of one shape) into a (batch, ...) tensor.
Tensor stack_features(std::span<const Tensor> features, std::span<const std::size_t> indices);

/// Drug/target string pairs with real affinities.
struct SequencePairDataset {
    std::string name;
    std::vector<std::string> drugs;
    std::vector<std::string> targets;
    std::vector<double> affinities;

    std::size_t size() const noexcept { return affinities.size(); }
};

/// A labeled source domain paired with a target domain whose labels are kept
/// for evaluation only.
class MultiDomainDataset {
public:
    MultiDomainDataset(Dataset source, Dataset target);

    const Dataset& source() const noexcept { return source_; }
    const std::vector<Tensor>& target_features() const noexcept { return target_features_; }
    std::size_t target_size() const noexcept { return target_features_.size(); }
    const Shape& feature_shape() const noexcept { return source_.features.front().shape(); }

    /// Oracle access for transductive evaluation. Training code must never
    /// call this.
    const std::vector<double>& target_labels_for_evaluation() const noexcept { return target_labels_; }

private:
    Dataset source_;
    std::vector<Tensor> target_features_;
    std::vector<double> target_labels_;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

/// Shuffles 0..n-1 and cuts it train|val|test. val and test get
/// floor(n * fraction); train takes the remainder.
SplitIndices split_three_way(std::size_t n, SplitFractions fractions, RngStream rng);

/// Header row, numeric columns, last column the label.
Dataset load_csv_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

/// Gaussian blobs in 2-D. The target domain applies rotation (about the origin)
/// followed by translation to freshly drawn source-distributed points.
struct BlobParams {
    std::size_t n_per_class = 500;
    std::vector<std::array<double, 2>> centers{{-1.0, 0.0}, {1.0, 0.0}};
    double noise = 0.5;
    double rotation_deg = 0.0;
    std::array<double, 2> translation{0.0, 0.0};
};

/// Random drug strings over "ABCDEFGH" and target strings over the 20 amino
/// acid letters, with motif copies planted at random. The affinity is
/// count("AB" in drug) + count("LMN" in target) + noise * N(0, 1), counts
/// taken over possibly overlapping occurrences in the final strings.
struct DtaParams {
    std::size_t n = 2500;
    std::size_t drug_max_len = 40;
    std::size_t target_max_len = 200;
    std::size_t max_planted_motifs = 3;
    double noise = 0.1;
};

inline constexpr std::string_view kDrugAlphabet = "ABCDEFGH";
inline constexpr std::string_view kTargetAlphabet = "ACDEFGHIKLMNPQRSTVWY";

/// Standard-normal noise tensors; class 1 additionally gets `mu` added inside
/// the planted block.
struct TensorPatternParams {
    std::size_t n_per_class = 100;
    Shape shape{16, 16, 8};
    Shape block_shape{4, 4, 2};
    Shape block_offset{6, 6, 3};
    double mu = 2.0;
    double noise = 1.0;
};

/// Counts every start position of `needle`, overlapping matches included.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept;

MultiDomainDataset generate_domain_shift_blobs(const BlobParams& params, RngStream rng);
SequencePairDataset generate_dta_strings(const DtaParams& params, RngStream rng);
Dataset generate_tensor_patterns(const TensorPatternParams& params, RngStream rng);

using SyntheticParams = std::variant<BlobParams, DtaParams, TensorPatternParams>;
using SyntheticData = std::variant<MultiDomainDataset, SequencePairDataset, Dataset>;

/// Dispatches on the parameter type.
SyntheticData generate_synthetic(const SyntheticParams& params, RngStream rng);

// ---------------------------------------------------------------------------
// Paired domain batches
// ---------------------------------------------------------------------------

struct DomainBatch {
    std::vector<std::size_t> source_indices;
    std::vector<std::size_t> target_indices;
    Tensor source_features;
    std::vector<double> source_labels;
    Tensor target_features;
};

/// One epoch of equal-size source/target batches. The larger domain is
/// visited once in shuffled order; the smaller one cycles through fresh
/// permutations. The trailing short batch is dropped.
std::vector<DomainBatch> paired_domain_batches(const MultiDomainDataset& md, std::size_t batch_size,
                                               RngStream& rng);

}  // namespace kale
