#ifndef ODCSA_METRICS_HPP
#define ODCSA_METRICS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace odcsa {

// A single prediction against its ground truth: pred in [0,1], gt binary,
// both row-major h*w.
struct PredPair {
  int h = 0, w = 0;
  std::vector<double> pred;
  std::vector<std::uint8_t> gt;
};

struct MetricReport {
  double mdice = 0.0;
  double miou = 0.0;
  double fbw = 0.0;
  double s_alpha = 0.0;
  double e_phi_max = 0.0;
  double mae = 0.0;
  std::size_t n_images = 0;
};

// Overlap scores averaged over the binarization sweep t in {1..255}/255.
// Per threshold: dice = 2|P∩G|/(|P|+|G|), iou = |P∩G|/|P∪G|; both-empty
// counts 1, exactly-one-empty counts 0.
std::pair<double, double> dice_iou(const PredPair& pair);

double mae(const PredPair& pair);

// Distance-weighted F-measure (beta = 1): errors outside the mask are pulled
// from the nearest foreground pixel, smoothed by a 7x7 Gaussian (sigma 5)
// and decayed with distance. Returns 0 for an empty mask and reports it via
// gt_empty when provided.
double weighted_fbeta(const PredPair& pair, bool* gt_empty = nullptr);

// Structure measure: 0.5 * object similarity + 0.5 * region similarity over
// the mask-centroid quadrants; degenerate masks fall back to mean-based
// scores. Clamped to [0,1].
double s_measure(const PredPair& pair);

// Enhanced alignment, maximized over the 256-threshold sweep. When the mask
// is all one value the per-threshold score is the pixel agreement ratio.
double e_measure_max(const PredPair& pair);

MetricReport evaluate_dataset(const std::vector<PredPair>& pairs);

std::string metric_csv_header();
std::string metric_csv_row(const std::string& dataset, const MetricReport& report);

}  // namespace odcsa

#endif
