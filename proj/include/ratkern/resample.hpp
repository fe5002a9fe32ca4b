#pragma once

// Separable resampling with the imresize coordinate mapping:
// u = (x + 0.5) / scale - 0.5, symmetric boundary folding with edge repeat,
// per-row renormalization, and kernel widening on reduction when
// antialiasing is enabled.

#include <cstddef>
#include <vector>

#include "ratkern/image.hpp"
#include "ratkern/kernel.hpp"

namespace ratkern::resample {

using kernel::PiecewiseRationalKernel;

struct WeightRow {
  std::size_t start = 0;        // first contributing input index
  std::vector<double> weights;  // contiguous taps from `start`
  std::size_t anchor = 0;       // offset of the largest weight
};

struct ResizeWeights {
  std::size_t in_len = 0;
  std::size_t out_len = 0;
  std::vector<WeightRow> rows;
};

/// Folds an out-of-range index into [0, n) by half-sample symmetric
/// reflection: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
std::size_t fold_index(long long index, std::size_t n);

ResizeWeights compute_weights(std::size_t in_len, std::size_t out_len,
                              const PiecewiseRationalKernel& kernel, bool antialias);

enum class PassOrder { RowsFirst, ColumnsFirst };

struct ResizeOptions {
  bool antialias = false;
  // RowsFirst resamples along each row (horizontal) before the columns.
  PassOrder order = PassOrder::RowsFirst;
  // Quantize after each 1-D pass, as imresize does for uint8 data.
  bool quantize_each_pass = false;
  unsigned threads = 0;
};

ImageF resize(const ImageF& image, std::size_t out_h, std::size_t out_w,
              const PiecewiseRationalKernel& kernel, const ResizeOptions& options = {});

/// Direct 2-D summation over every input sample. Exists only as a test
/// oracle for `resize`.
ImageF naive_resize(const ImageF& image, std::size_t out_h, std::size_t out_w,
                    const PiecewiseRationalKernel& kernel, bool antialias);

struct PipelineOptions {
  bool quantize = true;
  bool quantize_each_pass = false;
  std::size_t factor = 4;
  unsigned threads = 0;
};

struct PipelineResult {
  ImageF reduced;
  ImageF magnified;
};

/// Stage 1: reduce by `factor` with Cubic{-5/2} and antialiasing.
/// Throws DimsNotDivisible.
ImageF pipeline_reduce(const ImageF& image, const PipelineOptions& options = {});

/// Stage 2: magnify to out_h x out_w with `magnify_kernel`, no antialiasing.
ImageF pipeline_magnify(const ImageF& reduced, std::size_t out_h, std::size_t out_w,
                        const PiecewiseRationalKernel& magnify_kernel,
                        const PipelineOptions& options = {});

/// Both stages; quantization (when enabled) follows each stage.
PipelineResult experiment_pipeline(const ImageF& image,
                                   const PiecewiseRationalKernel& magnify_kernel,
                                   const PipelineOptions& options = {});

}  // namespace ratkern::resample
