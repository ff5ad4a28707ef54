#include "dds/config.hpp"

#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "dds/errors.hpp"
#include "dds/io.hpp"

namespace dds {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  const auto end = s.find_last_not_of(" \t\r");
  return begin == std::string::npos ? "" : s.substr(begin, end - begin + 1);
}

/// Section -> key -> raw value text.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

RawConfig parse_raw(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Comments start at '#' outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      else if (line[i] == '#' && !quoted) { line.erase(i); break; }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      raw[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
    if (!raw[section].emplace(key, value).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return raw;
}

class ConfigReader {
 public:
  explicit ConfigReader(RawConfig raw) : raw_(std::move(raw)) {}

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) {
    const std::string* v = lookup(section, key);
    if (!v) return fallback;
    if (v->size() < 2 || v->front() != '"' || v->back() != '"')
      throw ConfigError(section + "." + key + ": strings must be double-quoted");
    return v->substr(1, v->size() - 2);
  }

  double get_double(const std::string& section, const std::string& key, double fallback) {
    const std::string* v = lookup(section, key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
      return d;
    } catch (const std::exception&) {
      throw ConfigError(section + "." + key + ": not a number: " + *v);
    }
  }

  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) {
    const std::string* v = lookup(section, key);
    if (!v) return fallback;
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
      throw ConfigError(section + "." + key + ": not an integer: " + *v);
    return out;
  }

  /// Every parsed key must have been consumed by a getter.
  void reject_unknown() const {
    for (const auto& [section, entries] : raw_)
      for (const auto& [key, value] : entries)
        if (!consumed_.count(section + "." + key))
          throw ConfigError("unknown config key: " + section + "." + key);
  }

 private:
  const std::string* lookup(const std::string& section, const std::string& key) {
    consumed_.insert(section + "." + key);
    const auto s = raw_.find(section);
    if (s == raw_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  RawConfig raw_;
  std::set<std::string> consumed_;
};

}  // namespace

void PipelineConfig::validate() const {
  if (scene_dir.empty()) throw ConfigError("paths.scene_dir must be set");
  if (out_dir.empty()) throw ConfigError("paths.out_dir must be set");
  if (method != "diffusion" && method != "pca" && method != "gft")
    throw ConfigError("pipeline.method must be diffusion, pca, or gft");
  if (threads < 1) throw ConfigError("pipeline.threads must be positive");
  if (eta < 0.0 || eta > 1.0) throw ConfigError("pipeline.eta must lie in [0,1]");
  if (bev_size < 32) throw ConfigError("pipeline.bev_size must be at least 32");
  if (teacher_eps <= 0.0) throw ConfigError("teacher.eps must be positive");
  if (vote_eps <= 0.0) throw ConfigError("vote.eps must be positive");
  if (mask_merge.merge_iou < 0.0 || mask_merge.merge_iou > 1.0)
    throw ConfigError("mask_merge.merge_iou must lie in [0,1]");
  if (mask_merge.min_mask_points < 1)
    throw ConfigError("mask_merge.min_mask_points must be positive");
  if (distill.lambda_point < 0.0 || distill.lambda_proto < 0.0 || distill.lambda_nce < 0.0)
    throw ConfigError("distill weights must be non-negative");
  if (distill.tau <= 0.0) throw ConfigError("distill.tau must be positive");
  if (superpoint.voxel_size <= 0.0) throw ConfigError("superpoint.voxel_size must be positive");
  if (superpoint.growth_radius < 0.0)
    throw ConfigError("superpoint.growth_radius must be non-negative");
  if (diffusion.alpha <= 0.0 || diffusion.alpha >= 1.0)
    throw ConfigError("diffusion.alpha must lie in (0,1)");
  if (diffusion.max_iters < 1) throw ConfigError("diffusion.max_iters must be positive");
  if (diffusion.tol <= 0.0) throw ConfigError("diffusion.tol must be positive");
  if (gft_keep_fraction <= 0.0 || gft_keep_fraction > 1.0)
    throw ConfigError("pipeline.gft_keep_fraction must lie in (0,1]");
  if (cluster.energy_ratio <= 0.0 || cluster.energy_ratio > 1.0)
    throw ConfigError("cluster.energy_ratio must lie in (0,1]");
  if (cluster.k_coarse < 1) throw ConfigError("cluster.k_coarse must be positive");
  if (cluster.embed_dims < 1) throw ConfigError("cluster.embed_dims must be positive");
  if (cluster.k_primitive < 0) throw ConfigError("cluster.k_primitive must be non-negative");
  if (cluster.restarts < 1) throw ConfigError("cluster.restarts must be positive");
}

PipelineConfig parse_pipeline_config(const std::string& text) {
  ConfigReader reader(parse_raw(text));
  PipelineConfig cfg;
  cfg.scene_dir = reader.get_string("paths", "scene_dir", "");
  cfg.out_dir = reader.get_string("paths", "out_dir", cfg.out_dir);

  cfg.seed = static_cast<std::uint64_t>(reader.get_int("pipeline", "seed", 0));
  cfg.method = reader.get_string("pipeline", "method", cfg.method);
  cfg.threads = static_cast<int>(reader.get_int("pipeline", "threads", cfg.threads));
  cfg.eta = reader.get_double("pipeline", "eta", cfg.eta);
  cfg.bev_size = static_cast<int>(reader.get_int("pipeline", "bev_size", cfg.bev_size));
  cfg.gft_keep_fraction =
      reader.get_double("pipeline", "gft_keep_fraction", cfg.gft_keep_fraction);

  cfg.teacher_eps = reader.get_double("teacher", "eps", cfg.teacher_eps);
  cfg.vote_eps = reader.get_double("vote", "eps", cfg.vote_eps);

  cfg.mask_merge.merge_iou =
      reader.get_double("mask_merge", "merge_iou", cfg.mask_merge.merge_iou);
  cfg.mask_merge.min_mask_points = static_cast<int>(
      reader.get_int("mask_merge", "min_mask_points", cfg.mask_merge.min_mask_points));

  cfg.distill.lambda_point =
      reader.get_double("distill", "lambda_point", cfg.distill.lambda_point);
  cfg.distill.lambda_proto =
      reader.get_double("distill", "lambda_proto", cfg.distill.lambda_proto);
  cfg.distill.lambda_nce = reader.get_double("distill", "lambda_nce", cfg.distill.lambda_nce);
  cfg.distill.tau = reader.get_double("distill", "tau", cfg.distill.tau);

  cfg.superpoint.voxel_size =
      reader.get_double("superpoint", "voxel_size", cfg.superpoint.voxel_size);
  cfg.superpoint.growth_radius =
      reader.get_double("superpoint", "growth_radius", cfg.superpoint.growth_radius);

  cfg.diffusion.alpha = reader.get_double("diffusion", "alpha", cfg.diffusion.alpha);
  cfg.diffusion.max_iters =
      static_cast<int>(reader.get_int("diffusion", "max_iters", cfg.diffusion.max_iters));
  cfg.diffusion.tol = reader.get_double("diffusion", "tol", cfg.diffusion.tol);

  cfg.cluster.energy_ratio =
      reader.get_double("cluster", "energy_ratio", cfg.cluster.energy_ratio);
  cfg.cluster.k_coarse =
      static_cast<int>(reader.get_int("cluster", "k_coarse", cfg.cluster.k_coarse));
  cfg.cluster.embed_dims =
      static_cast<int>(reader.get_int("cluster", "embed_dims", cfg.cluster.embed_dims));
  cfg.cluster.k_primitive = static_cast<int>(reader.get_int("cluster", "k_primitive", 0));
  cfg.cluster.restarts =
      static_cast<int>(reader.get_int("cluster", "restarts", cfg.cluster.restarts));
  cfg.cluster.seed = cfg.seed;

  reader.reject_unknown();
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  try {
    return parse_pipeline_config(read_text_file(path));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

std::string default_config_text(const std::string& scene_dir, const std::string& out_dir) {
  std::ostringstream os;
  os << "[paths]\n"
     << "scene_dir = \"" << scene_dir << "\"\n"
     << "out_dir = \"" << out_dir << "\"\n\n"
     << "[pipeline]\n"
     << "seed = 0\n"
     << "method = \"diffusion\"      # diffusion | pca | gft\n"
     << "threads = 1\n"
     << "eta = 0.5                 # cluster naming confidence threshold\n"
     << "bev_size = 512\n"
     << "gft_keep_fraction = 0.25\n\n"
     << "[teacher]\n"
     << "eps = 1e-8                # multi-view average denominator guard\n\n"
     << "[vote]\n"
     << "eps = 1e-8                # vote ratio denominator guard\n\n"
     << "[mask_merge]\n"
     << "merge_iou = 0.5\n"
     << "min_mask_points = 10\n\n"
     << "[distill]\n"
     << "lambda_point = 1.0\n"
     << "lambda_proto = 1.0\n"
     << "lambda_nce = 0.3\n"
     << "tau = 0.07\n\n"
     << "[superpoint]\n"
     << "voxel_size = 0.5\n"
     << "growth_radius = 0.3\n\n"
     << "[diffusion]\n"
     << "alpha = 0.5\n"
     << "max_iters = 200\n"
     << "tol = 1e-10\n\n"
     << "[cluster]\n"
     << "energy_ratio = 0.9\n"
     << "k_coarse = 32\n"
     << "embed_dims = 16\n"
     << "k_primitive = 0           # 0 = one primitive per scene class\n"
     << "restarts = 5\n";
  return os.str();
}

}  // namespace dds
