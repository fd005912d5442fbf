#include "mrgp/model_io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "mrgp/errors.hpp"
#include "mrgp/inference.hpp"

namespace mrgp {

namespace {

using nlohmann::json;

json vec_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vec_from_json(const json& j) {
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

json mat_to_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vec_to_json(m.row(r).transpose()));
  return out;
}

Matrix mat_from_json(const json& j) {
  if (j.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(j[0].size()));
  for (Index r = 0; r < m.rows(); ++r) m.row(r) = vec_from_json(j[r]).transpose();
  return m;
}

json config_to_json(const ModelConfig& c) {
  return json{{"m", c.m},
              {"q", c.q},
              {"p", c.p},
              {"mode", mode_name(c.mode)},
              {"nu", c.spectral.nu},
              {"lengthscale", c.spectral.length},
              {"variance", c.spectral.variance},
              {"dx", c.spectral.dx},
              {"sweeps_per_resolution", c.sweeps_per_resolution},
              {"convergence_tol", c.convergence_tol},
              {"tau_update_period", c.tau_update_period},
              {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.m = j.at("m").get<int>();
  c.q = j.at("q").get<int>();
  c.p = j.at("p").get<int>();
  c.mode = mode_from_name(j.at("mode").get<std::string>());
  c.spectral.nu = j.at("nu").get<double>();
  c.spectral.length = j.at("lengthscale").get<double>();
  c.spectral.variance = j.at("variance").get<double>();
  c.spectral.dx = j.at("dx").get<int>();
  c.sweeps_per_resolution = j.at("sweeps_per_resolution").get<int>();
  c.convergence_tol = j.at("convergence_tol").get<double>();
  c.tau_update_period = j.at("tau_update_period").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
  json root;
  root["format"] = "mrgp-model";
  root["version"] = 1;
  root["config"] = config_to_json(model.config);
  root["n"] = model.n;
  root["d_x"] = model.d_x;
  root["d_y"] = model.d_y;
  root["basis_count"] = model.p;
  root["standardizer"] = {{"mean", vec_to_json(model.standardizer.mean)},
                          {"std", vec_to_json(model.standardizer.std)}};

  json boxes = json::array();
  for (const auto& level : model.boxes) {
    json lev = json::array();
    for (const auto& box : level)
      lev.push_back({{"lo", vec_to_json(box.lo)}, {"hi", vec_to_json(box.hi)}});
    boxes.push_back(std::move(lev));
  }
  root["boxes"] = std::move(boxes);

  json levels = json::array();
  for (const auto& level : model.levels) {
    json regions = json::array();
    for (const auto& r : level.regions) {
      regions.push_back({{"lo", r.range.lo},
                         {"hi", r.range.hi},
                         {"center", vec_to_json(r.center)},
                         {"half_range", vec_to_json(r.half_range)},
                         {"tau", vec_to_json(r.tau)},
                         {"nu", vec_to_json(r.bias.nu)},
                         {"theta", r.bias.theta},
                         {"c", r.bias.c},
                         {"d", r.bias.d},
                         {"theta0", r.bias.theta0},
                         {"c0", r.bias.c0},
                         {"d0", r.bias.d0},
                         {"v", vec_to_json(r.scales.v)},
                         {"zeta", vec_to_json(r.scales.zeta)},
                         {"ztilde", mat_to_json(r.scales.ztilde)}});
    }
    json blocks = json::array();
    for (const auto& b : level.blocks) {
      json axes = json::array();
      for (const auto& ax : b.axes)
        axes.push_back({{"M", mat_to_json(ax.M)}, {"kappa", vec_to_json(ax.kappa)}});
      json jb = {{"axes", std::move(axes)},
                 {"alpha", vec_to_json(b.alpha)},
                 {"beta", vec_to_json(b.beta)}};
      if (b.has_omega) jb["omega"] = mat_to_json(b.omega);
      blocks.push_back(std::move(jb));
    }
    levels.push_back({{"regions", std::move(regions)}, {"blocks", std::move(blocks)}});
  }
  root["levels"] = std::move(levels);

  json elbo = json::array();
  for (const auto& rec : model.elbo) {
    elbo.push_back({{"level", rec.level},
                    {"cycle", rec.cycle},
                    {"sweep", rec.sweep},
                    {"data_term", rec.data_term},
                    {"kl_scales", rec.kl_scales},
                    {"kl_axes", rec.kl_axes},
                    {"kl_precisions", rec.kl_precisions},
                    {"kl_index_map", rec.kl_index_map},
                    {"kl_bias_noise", rec.kl_bias_noise},
                    {"surrogate", rec.surrogate}});
  }
  root["elbo"] = std::move(elbo);
  return root.dump();
}

TrainedModel model_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& err) {
    throw DataError(std::string("model: invalid JSON: ") + err.what());
  }
  try {
    if (root.at("format").get<std::string>() != "mrgp-model")
      throw DataError("model: unrecognized container format");
    if (root.at("version").get<int>() != 1)
      throw DataError("model: unsupported container version");

    TrainedModel model;
    model.config = config_from_json(root.at("config"));
    model.n = root.at("n").get<Index>();
    model.d_x = root.at("d_x").get<Index>();
    model.d_y = root.at("d_y").get<Index>();
    model.p = root.at("basis_count").get<int>();
    model.standardizer.mean = vec_from_json(root.at("standardizer").at("mean"));
    model.standardizer.std = vec_from_json(root.at("standardizer").at("std"));
    model.partition = build_partition(model.n, model.config.m, model.config.q);

    for (const auto& lev : root.at("boxes")) {
      std::vector<RegionBox> level;
      for (const auto& jb : lev) {
        RegionBox box;
        box.lo = vec_from_json(jb.at("lo"));
        box.hi = vec_from_json(jb.at("hi"));
        level.push_back(std::move(box));
      }
      model.boxes.push_back(std::move(level));
    }

    for (const auto& jl : root.at("levels")) {
      LevelPosterior level;
      for (const auto& jr : jl.at("regions")) {
        RegionPosterior r;
        r.range.lo = jr.at("lo").get<Index>();
        r.range.hi = jr.at("hi").get<Index>();
        r.center = vec_from_json(jr.at("center"));
        r.half_range = vec_from_json(jr.at("half_range"));
        r.tau = vec_from_json(jr.at("tau"));
        r.bias.nu = vec_from_json(jr.at("nu"));
        r.bias.theta = jr.at("theta").get<double>();
        r.bias.c = jr.at("c").get<double>();
        r.bias.d = jr.at("d").get<double>();
        r.bias.theta0 = jr.at("theta0").get<double>();
        r.bias.c0 = jr.at("c0").get<double>();
        r.bias.d0 = jr.at("d0").get<double>();
        r.scales.v = vec_from_json(jr.at("v"));
        r.scales.zeta = vec_from_json(jr.at("zeta"));
        r.scales.ztilde = mat_from_json(jr.at("ztilde"));
        level.regions.push_back(std::move(r));
      }
      for (const auto& jb : jl.at("blocks")) {
        AxesBlock b;
        for (const auto& ja : jb.at("axes")) {
          BinghamParams ax;
          ax.M = mat_from_json(ja.at("M"));
          ax.kappa = vec_from_json(ja.at("kappa"));
          b.axes.push_back(std::move(ax));
        }
        b.alpha = vec_from_json(jb.at("alpha"));
        b.beta = vec_from_json(jb.at("beta"));
        b.has_omega = jb.contains("omega");
        if (b.has_omega) b.omega = mat_from_json(jb.at("omega"));
        b.refresh_axis_moments();
        b.refresh_precision_moments();
        level.blocks.push_back(std::move(b));
      }
      model.levels.push_back(std::move(level));
    }

    // rebuild the derived scale moments from the serialized posteriors
    for (auto& level : model.levels) {
      for (Index l = 0; l < static_cast<Index>(level.regions.size()); ++l) {
        RegionPosterior& r = level.regions[l];
        const AxesBlock& block = level.blocks[level.block_of(l)];
        const int p = static_cast<int>(r.scales.v.size());
        r.scales.au = Matrix::Zero(p, model.d_y);
        r.scales.a2 = Vector::Zero(p);
        r.scales.central = Vector::Zero(p);
        for (int i = 0; i < p; ++i) {
          if (!(r.scales.v[i] > 0)) continue;
          const JointMoments m =
              joint_moments(r.scales.zeta[i], r.scales.ztilde.row(i).transpose(),
                            r.scales.v[i], block.mom[i].uu);
          r.scales.au.row(i) = m.au.transpose();
          r.scales.a2[i] = m.a2;
          r.scales.central[i] = m.central;
        }
      }
    }

    for (const auto& je : root.at("elbo")) {
      ElboRecord rec;
      rec.level = je.at("level").get<int>();
      rec.cycle = je.at("cycle").get<int>();
      rec.sweep = je.at("sweep").get<int>();
      rec.data_term = je.at("data_term").get<double>();
      rec.kl_scales = je.at("kl_scales").get<double>();
      rec.kl_axes = je.at("kl_axes").get<double>();
      rec.kl_precisions = je.at("kl_precisions").get<double>();
      rec.kl_index_map = je.at("kl_index_map").get<double>();
      rec.kl_bias_noise = je.at("kl_bias_noise").get<double>();
      rec.surrogate = je.at("surrogate").get<double>();
      model.elbo.push_back(rec);
    }
    return model;
  } catch (const json::exception& err) {
    throw DataError(std::string("model: malformed container: ") + err.what());
  }
}

void save_model(const TrainedModel& model, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("model: cannot write '" + tmp + "'");
    out << model_to_json(model);
    if (!out) throw DataError("model: failed while writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw DataError("model: cannot move temporary file onto '" + path + "'");
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("model: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace mrgp
