#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "kale/embed.hpp"
#include "kale/predict.hpp"
#include "kale/tensor.hpp"

namespace kale {

struct WeightMap {
    Tensor weights;  // input-sample shape
    std::string provenance;
};

/// Keeps the k entries of largest magnitude and zeroes the rest. Ties at the
/// threshold go to the lower flat index.
Tensor select_top_weight(const Tensor& weights, std::size_t count);
/// Fraction form: k = ceil(fraction * size), fraction in (0, 1].
Tensor select_top_weight(const Tensor& weights, double fraction);

/// Pads clf.w with zeros to the full projected feature vector, back-projects
/// it and subtracts the MPCA mean.
WeightMap weights_to_input_space(const MpcaModel& mpca, const LinearClassifier& clf);

enum class ExportFormat { csv, pgm_slices };

/// csv: header "flat_index,index,value", multi-index as colon-separated
/// coordinates. pgm_slices: 8-bit binary PGM rescaled over the whole map
/// (min 0, max 255, constant 128). Order <= 2 writes `path` itself; higher
/// orders write `<path>_slice<k>.pgm`, one per index of the last mode; the
/// second-to-last mode runs along image columns and the earlier modes are
/// flattened into rows.
void export_weight_map(const WeightMap& map, const std::filesystem::path& path, ExportFormat format);

}  // namespace kale
