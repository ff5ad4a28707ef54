#include "dds/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dds/errors.hpp"
#include "dds/parallel.hpp"

namespace dds {

namespace {

/// One mask lifted into 3D through a single view.
struct LiftedMask {
  std::string label;
  std::vector<int> points;  // ascending
  int view = 0;
  int mask = 0;
};

std::vector<LiftedMask> lift_per_view(const PointCloud& cloud,
                                      const std::vector<std::pair<CameraModel, ViewMaskSet>>& views,
                                      int min_mask_points, int threads) {
  std::vector<LiftedMask> lifted;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto& cam = views[v].first;
    const auto& maskset = views[v].second;
    if (maskset.masks.empty()) continue;
    const auto proj = project_cloud(cloud, cam, threads);

    // Linear pixel index per visible point, -1 otherwise.
    std::vector<std::int64_t> pix(proj.size(), -1);
    for (std::size_t i = 0; i < proj.size(); ++i) {
      if (!proj[i].visible) continue;
      const Eigen::Vector2i q = nearest_pixel(proj[i].pixel, cam.width, cam.height);
      pix[i] = static_cast<std::int64_t>(q.y()) * cam.width + q.x();
    }

    for (std::size_t k = 0; k < maskset.masks.size(); ++k) {
      const auto& mask = maskset.masks[k];
      if (mask.label.empty()) throw Error("mask labels must be nonempty");
      LiftedMask lm;
      lm.label = mask.label;
      lm.view = static_cast<int>(v);
      lm.mask = static_cast<int>(k);
      for (std::size_t i = 0; i < pix.size(); ++i) {
        if (pix[i] < 0) continue;
        if (std::binary_search(mask.pixels.begin(), mask.pixels.end(), pix[i]))
          lm.points.push_back(static_cast<int>(i));
      }
      if (static_cast<int>(lm.points.size()) >= min_mask_points) lifted.push_back(std::move(lm));
    }
  }
  return lifted;
}

double point_set_iou(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t inter = 0, ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] < b[ib]) ++ia;
    else if (b[ib] < a[ia]) ++ib;
    else { ++inter; ++ia; ++ib; }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

Eigen::VectorXd ViewFeatureMap::sample(int u, int v) const {
  Eigen::VectorXd f(channels);
  for (int c = 0; c < channels; ++c) f[c] = static_cast<double>(at(c, v, u));
  return f;
}

void ViewFeatureMap::validate() const {
  if (channels <= 0 || height <= 0 || width <= 0)
    throw Error("feature map dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(channels) * height * width)
    throw Error("feature map buffer size does not match dimensions");
  for (float x : values)
    if (!std::isfinite(x)) throw Error("feature map contains non-finite entries");
}

TeacherField build_teacher(const PointCloud& cloud,
                           const std::vector<std::pair<CameraModel, ViewFeatureMap>>& views,
                           int threads, double eps) {
  int channels = 0;
  for (const auto& [cam, fmap] : views) {
    if (fmap.height != cam.height || fmap.width != cam.width)
      throw Error("feature map resolution does not match its camera");
    if (channels == 0) channels = fmap.channels;
    else if (fmap.channels != channels)
      throw MismatchedChannels("views disagree on feature channel count");
  }

  const Eigen::Index n = cloud.size();
  TeacherField out;
  out.features = Eigen::MatrixXd::Zero(n, channels);
  out.visible.assign(static_cast<std::size_t>(n), false);
  out.view_counts.assign(static_cast<std::size_t>(n), 0);
  if (channels == 0) return out;

  // Per-view projections and sampled features are independent; the reduction
  // over views below runs in fixed view order.
  std::vector<std::vector<Projection>> proj(views.size());
  for (std::size_t v = 0; v < views.size(); ++v)
    proj[v] = project_cloud(cloud, views[v].first, threads);

  parallel_for(n, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(channels);
      int count = 0;
      for (std::size_t v = 0; v < views.size(); ++v) {
        const Projection& pr = proj[v][static_cast<std::size_t>(i)];
        if (!pr.visible) continue;
        const auto& cam = views[v].first;
        const Eigen::Vector2i q = nearest_pixel(pr.pixel, cam.width, cam.height);
        sum += views[v].second.sample(q.x(), q.y());
        ++count;
      }
      out.view_counts[static_cast<std::size_t>(i)] = count;
      if (count > 0) {
        out.visible[static_cast<std::size_t>(i)] = true;
        out.features.row(i) = sum.transpose() / (static_cast<double>(count) + eps);
      }
    }
  });
  return out;
}

MaskGroups lift_masks(const PointCloud& cloud,
                      const std::vector<std::pair<CameraModel, ViewMaskSet>>& views,
                      const MaskMergeConfig& cfg, int threads) {
  // The size filter applies after the cross-view merge, so sub-threshold
  // per-view masks may still combine into a surviving group.
  std::vector<LiftedMask> lifted = lift_per_view(cloud, views, 1, threads);

  // Canonical merge order: descending lifted-point count, then lowest view
  // index, then lowest mask index.
  std::sort(lifted.begin(), lifted.end(), [](const LiftedMask& a, const LiftedMask& b) {
    if (a.points.size() != b.points.size()) return a.points.size() > b.points.size();
    if (a.view != b.view) return a.view < b.view;
    return a.mask < b.mask;
  });

  // Fixpoint pairwise merge: the first qualifying pair (same label, IoU at or
  // above the threshold) merges into the earlier mask, preserving order.
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < lifted.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < lifted.size() && !merged; ++j) {
        if (lifted[i].label != lifted[j].label) continue;
        if (point_set_iou(lifted[i].points, lifted[j].points) < cfg.merge_iou) continue;
        lifted[i].points = set_union(lifted[i].points, lifted[j].points);
        lifted.erase(lifted.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }

  // Undersized groups are dropped after the merge.
  std::erase_if(lifted, [&](const LiftedMask& m) {
    return static_cast<int>(m.points.size()) < cfg.min_mask_points;
  });

  // Overlap resolution: a point claimed by several groups goes to the one
  // with the larger pre-resolution size, ties to the lowest group index.
  const Eigen::Index n = cloud.size();
  std::vector<int> claim(static_cast<std::size_t>(n), -1);
  for (std::size_t g = 0; g < lifted.size(); ++g) {
    for (int p : lifted[g].points) {
      const int cur = claim[static_cast<std::size_t>(p)];
      if (cur < 0) { claim[static_cast<std::size_t>(p)] = static_cast<int>(g); continue; }
      const std::size_t cur_size = lifted[static_cast<std::size_t>(cur)].points.size();
      if (lifted[g].points.size() > cur_size) claim[static_cast<std::size_t>(p)] = static_cast<int>(g);
    }
  }

  std::vector<std::vector<int>> resolved(lifted.size());
  for (std::size_t p = 0; p < claim.size(); ++p)
    if (claim[p] >= 0) resolved[static_cast<std::size_t>(claim[p])].push_back(static_cast<int>(p));

  // Groups pushed below the size floor by the resolution are dropped and
  // their points released to -1.
  MaskGroups out;
  out.point_mask.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t g = 0; g < lifted.size(); ++g) {
    if (static_cast<int>(resolved[g].size()) < cfg.min_mask_points) continue;
    const int idx = static_cast<int>(out.groups.size());
    for (int p : resolved[g]) out.point_mask[static_cast<std::size_t>(p)] = idx;
    out.groups.push_back({lifted[g].label, std::move(resolved[g])});
  }
  return out;
}

std::vector<std::vector<std::string>> collect_point_labels(
    const PointCloud& cloud, const std::vector<std::pair<CameraModel, ViewMaskSet>>& views,
    const MaskMergeConfig& cfg, int threads) {
  std::vector<std::vector<std::string>> labels(static_cast<std::size_t>(cloud.size()));
  for (const LiftedMask& lm : lift_per_view(cloud, views, cfg.min_mask_points, threads))
    for (int p : lm.points) labels[static_cast<std::size_t>(p)].push_back(lm.label);
  return labels;
}

}  // namespace dds
