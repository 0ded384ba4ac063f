#include "odcsa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "odcsa/edt.hpp"

namespace odcsa {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void validate(const PredPair& pair, const char* where) {
  const std::size_t count = static_cast<std::size_t>(pair.h) * pair.w;
  if (pair.pred.size() != count || pair.gt.size() != count) {
    throw std::invalid_argument(std::string(where) + ": pred/gt size does not match h*w");
  }
  for (double v : pair.pred) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(where) + ": prediction values must lie in [0,1]");
    }
  }
}

std::size_t gt_count(const PredPair& pair) {
  std::size_t c = 0;
  for (auto g : pair.gt) c += g ? 1 : 0;
  return c;
}

// MATLAB-style round: positive half values go up.
int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

std::pair<double, double> dice_iou(const PredPair& pair) {
  validate(pair, "dice_iou");
  const std::size_t count = pair.pred.size();
  std::size_t g_total = gt_count(pair);

  double dice_sum = 0.0, iou_sum = 0.0;
  for (int t = 1; t <= 255; ++t) {
    const double thr = t / 255.0;
    std::size_t p_total = 0, inter = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (pair.pred[i] >= thr) {
        ++p_total;
        if (pair.gt[i]) ++inter;
      }
    }
    if (p_total == 0 && g_total == 0) {
      dice_sum += 1.0;
      iou_sum += 1.0;
    } else if (p_total == 0 || g_total == 0) {
      // exactly one empty: zero overlap by definition
    } else {
      dice_sum += 2.0 * static_cast<double>(inter) / static_cast<double>(p_total + g_total);
      const std::size_t uni = p_total + g_total - inter;
      iou_sum += static_cast<double>(inter) / static_cast<double>(uni);
    }
  }
  return {dice_sum / 255.0, iou_sum / 255.0};
}

double mae(const PredPair& pair) {
  validate(pair, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < pair.pred.size(); ++i) {
    acc += std::abs(pair.pred[i] - static_cast<double>(pair.gt[i]));
  }
  return acc / static_cast<double>(pair.pred.size());
}

double weighted_fbeta(const PredPair& pair, bool* gt_empty) {
  validate(pair, "weighted_fbeta");
  const int H = pair.h, W = pair.w;
  const std::size_t count = pair.pred.size();
  const std::size_t fg = gt_count(pair);
  if (gt_empty) *gt_empty = (fg == 0);
  if (fg == 0) return 0.0;

  std::vector<double> err(count);
  for (std::size_t i = 0; i < count; ++i) {
    err[i] = std::abs(static_cast<double>(pair.gt[i]) - pair.pred[i]);
  }

  const DistanceField field = distance_transform(pair.gt, H, W);

  // Background errors borrow the error at the nearest foreground pixel.
  std::vector<double> err_t = err;
  for (std::size_t i = 0; i < count; ++i) {
    if (!pair.gt[i]) {
      err_t[i] = err[static_cast<std::size_t>(field.site_row[i]) * W + field.site_col[i]];
    }
  }

  // 7x7 Gaussian, sigma 5, normalized, zero padded.
  double kernel[7][7];
  double ksum = 0.0;
  for (int a = 0; a < 7; ++a) {
    for (int b = 0; b < 7; ++b) {
      kernel[a][b] = std::exp(-((a - 3) * (a - 3) + (b - 3) * (b - 3)) / 50.0);
      ksum += kernel[a][b];
    }
  }
  for (auto& row : kernel) {
    for (double& v : row) v /= ksum;
  }
  std::vector<double> err_smooth(count, 0.0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int a = 0; a < 7; ++a) {
        const int sy = y + a - 3;
        if (sy < 0 || sy >= H) continue;
        for (int b = 0; b < 7; ++b) {
          const int sx = x + b - 3;
          if (sx < 0 || sx >= W) continue;
          acc += kernel[a][b] * err_t[static_cast<std::size_t>(sy) * W + sx];
        }
      }
      err_smooth[static_cast<std::size_t>(y) * W + x] = acc;
    }
  }

  // Inside the mask keep the smaller of the raw and smoothed errors; outside
  // keep the raw error, decayed in importance with the distance to the mask.
  const double decay = std::log(0.5) / 5.0;
  double ew_fg_sum = 0.0, ew_bg_sum = 0.0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (pair.gt[i]) {
        ew_fg_sum += (err_smooth[i] < err[i]) ? err_smooth[i] : err[i];
      } else {
        const double importance = 2.0 - std::exp(decay * field.dist(y, x));
        ew_bg_sum += err[i] * importance;
      }
    }
  }

  const double tpw = static_cast<double>(fg) - ew_fg_sum;
  const double fpw = ew_bg_sum;
  const double recall = 1.0 - ew_fg_sum / static_cast<double>(fg);
  const double precision = tpw / (kEps + tpw + fpw);
  return 2.0 * recall * precision / (kEps + recall + precision);
}

namespace {

struct RegionStats {
  double mean_pred = 0.0, mean_gt = 0.0;
  double var_pred = 0.0, var_gt = 0.0, cov = 0.0;
  std::size_t n = 0;
};

// SSIM-style similarity on one quadrant (N-1 normalization as in the
// reference construction).
double region_similarity(const PredPair& pair, int y0, int y1, int x0, int x1) {
  const std::size_t n = static_cast<std::size_t>(y1 - y0) * (x1 - x0);
  if (n == 0) return 0.0;
  double sp = 0.0, sg = 0.0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * pair.w + x;
      sp += pair.pred[i];
      sg += pair.gt[i];
    }
  }
  const double mp = sp / n, mg = sg / n;
  double vp = 0.0, vg = 0.0, cov = 0.0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * pair.w + x;
      const double dp = pair.pred[i] - mp;
      const double dg = pair.gt[i] - mg;
      vp += dp * dp;
      vg += dg * dg;
      cov += dp * dg;
    }
  }
  const double denom = static_cast<double>(n) - 1.0 + kEps;
  vp /= denom;
  vg /= denom;
  cov /= denom;
  const double alpha = 4.0 * mp * mg * cov;
  const double beta = (mp * mp + mg * mg) * (vp + vg);
  if (alpha != 0.0) return alpha / (beta + kEps);
  return (beta == 0.0) ? 1.0 : 0.0;
}

double object_similarity(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  const double mean = s / values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(var / (values.size() - 1.0)) : 0.0;
  return 2.0 * mean / (mean * mean + 1.0 + sd + kEps);
}

}  // namespace

double s_measure(const PredPair& pair) {
  validate(pair, "s_measure");
  const std::size_t count = pair.pred.size();
  const std::size_t fg = gt_count(pair);

  double pred_mean = 0.0;
  for (double v : pair.pred) pred_mean += v;
  pred_mean /= static_cast<double>(count);

  if (fg == 0) return std::clamp(1.0 - pred_mean, 0.0, 1.0);
  if (fg == count) return std::clamp(pred_mean, 0.0, 1.0);

  // Object term: foreground similarity on pred within the mask, background
  // similarity on (1 - pred) outside it.
  std::vector<double> fg_vals, bg_vals;
  fg_vals.reserve(fg);
  bg_vals.reserve(count - fg);
  for (std::size_t i = 0; i < count; ++i) {
    if (pair.gt[i]) {
      fg_vals.push_back(pair.pred[i]);
    } else {
      bg_vals.push_back(1.0 - pair.pred[i]);
    }
  }
  const double mu = static_cast<double>(fg) / static_cast<double>(count);
  const double s_object = mu * object_similarity(fg_vals) + (1.0 - mu) * object_similarity(bg_vals);

  // Region term: quadrants around the mask centroid (1-based arithmetic, as
  // in the reference construction).
  const int H = pair.h, W = pair.w;
  double cx = 0.0, cy = 0.0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (pair.gt[static_cast<std::size_t>(y) * W + x]) {
        cx += x + 1;
        cy += y + 1;
      }
    }
  }
  const int X = round_half_up(cx / static_cast<double>(fg));
  const int Y = round_half_up(cy / static_cast<double>(fg));

  const double area = static_cast<double>(count);
  const double w1 = static_cast<double>(X) * Y / area;
  const double w2 = static_cast<double>(W - X) * Y / area;
  const double w3 = static_cast<double>(X) * (H - Y) / area;
  const double w4 = 1.0 - w1 - w2 - w3;

  const double q1 = region_similarity(pair, 0, Y, 0, X);
  const double q2 = region_similarity(pair, 0, Y, X, W);
  const double q3 = region_similarity(pair, Y, H, 0, X);
  const double q4 = region_similarity(pair, Y, H, X, W);
  const double s_region = w1 * q1 + w2 * q2 + w3 * q3 + w4 * q4;

  return std::clamp(0.5 * s_object + 0.5 * s_region, 0.0, 1.0);
}

double e_measure_max(const PredPair& pair) {
  validate(pair, "e_measure_max");
  const std::size_t count = pair.pred.size();
  const std::size_t fg = gt_count(pair);
  const double mu_gt = static_cast<double>(fg) / static_cast<double>(count);
  const bool degenerate = (fg == 0 || fg == count);
  constexpr double eps = 1e-8;

  double best = 0.0;
  std::vector<std::uint8_t> fm(count);
  for (int t = 0; t <= 255; ++t) {
    const double thr = t / 255.0;
    std::size_t fm_fg = 0;
    for (std::size_t i = 0; i < count; ++i) {
      fm[i] = pair.pred[i] >= thr ? 1 : 0;
      fm_fg += fm[i];
    }
    double score;
    if (degenerate) {
      std::size_t agree = 0;
      for (std::size_t i = 0; i < count; ++i) agree += (fm[i] == pair.gt[i]) ? 1 : 0;
      score = static_cast<double>(agree) / static_cast<double>(count);
    } else {
      const double mu_fm = static_cast<double>(fm_fg) / static_cast<double>(count);
      double acc = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        const double ag = static_cast<double>(pair.gt[i]) - mu_gt;
        const double af = static_cast<double>(fm[i]) - mu_fm;
        const double phi = 2.0 * ag * af / (ag * ag + af * af + eps);
        acc += (phi + 1.0) * (phi + 1.0) / 4.0;
      }
      score = acc / static_cast<double>(count);
    }
    best = std::max(best, score);
  }
  return best;
}

MetricReport evaluate_dataset(const std::vector<PredPair>& pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("evaluate_dataset: no prediction pairs");
  }
  MetricReport rep;
  rep.n_images = pairs.size();
  for (const auto& pair : pairs) {
    const auto [d, i] = dice_iou(pair);
    rep.mdice += d;
    rep.miou += i;
    rep.fbw += weighted_fbeta(pair);
    rep.s_alpha += s_measure(pair);
    rep.e_phi_max += e_measure_max(pair);
    rep.mae += mae(pair);
  }
  const double n = static_cast<double>(pairs.size());
  rep.mdice /= n;
  rep.miou /= n;
  rep.fbw /= n;
  rep.s_alpha /= n;
  rep.e_phi_max /= n;
  rep.mae /= n;
  return rep;
}

std::string metric_csv_header() { return "dataset,mdice,miou,fbw,salpha,ephimax,mae,n"; }

std::string metric_csv_row(const std::string& dataset, const MetricReport& rep) {
  std::ostringstream os;
  os << dataset << "," << std::fixed << std::setprecision(6) << rep.mdice << "," << rep.miou
     << "," << rep.fbw << "," << rep.s_alpha << "," << rep.e_phi_max << "," << rep.mae << ","
     << rep.n_images;
  return os.str();
}

}  // namespace odcsa
