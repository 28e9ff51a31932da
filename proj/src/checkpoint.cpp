#include "geodtr/checkpoint.hpp"

#include "geodtr/run_config.hpp"
#include "geodtr/tensor_io.hpp"

#include <fstream>

namespace geodtr {

namespace {

NamedTensor to_record(const std::string& name, const Mat& m) {
  NamedTensor t;
  t.name = name;
  t.dtype = 1;
  t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  t.data.resize(m.size());
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data[i++] = m(r, c);
  return t;
}

Mat from_record(const NamedTensor& t) {
  if (t.dims.size() != 2)
    throw std::runtime_error("checkpoint record " + t.name + " is not rank 2");
  Mat m(t.dims[0], t.dims[1]);
  std::size_t i = 0;
  for (std::uint32_t r = 0; r < t.dims[0]; ++r)
    for (std::uint32_t c = 0; c < t.dims[1]; ++c) m(r, c) = t.data[i++];
  return m;
}

void assign_checked(const std::string& name, const Mat& src, Mat& dst) {
  if (src.rows() != dst.rows() || src.cols() != dst.cols())
    throw std::runtime_error(
        "parameter " + name + " has shape " + std::to_string(src.rows()) + "x" +
        std::to_string(src.cols()) + " in the checkpoint but the model expects " +
        std::to_string(dst.rows()) + "x" + std::to_string(dst.cols()));
  dst = src;
}

}  // namespace

void save_checkpoint(const std::string& path, GeoDtr& model,
                     const AdamW* optimizer, long step,
                     const nlohmann::json& config) {
  std::vector<NamedTensor> records;
  model.visit_params([&](const std::string& name, Tensor& t) {
    records.push_back(to_record("param/" + name, t.v));
  });
  if (optimizer) {
    for (const auto& [name, mv] : optimizer->moments()) {
      records.push_back(to_record("adam/m/" + name, mv.first));
      records.push_back(to_record("adam/v/" + name, mv.second));
    }
  }
  NamedTensor step_t;
  step_t.name = "step";
  step_t.dtype = 1;
  step_t.data = {static_cast<double>(step)};
  records.push_back(std::move(step_t));

  write_tensor_container(path, records);

  std::ofstream side(path + ".json", std::ios::binary);
  if (!side) throw std::runtime_error("cannot write checkpoint sidecar: " + path + ".json");
  side << config.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw std::runtime_error("missing checkpoint sidecar: " + path + ".json");
  nlohmann::json config;
  side >> config;

  const RunConfig run = RunConfig::from_json(config);
  Checkpoint ck;
  ck.config = config;
  ck.model = GeoDtr::build(run.train.model, run.train.use_polar_transform, 0);

  std::map<std::string, Mat> records;
  for (const auto& t : read_tensor_container(path)) {
    if (t.name == "step") {
      ck.step = static_cast<long>(t.data.at(0));
      continue;
    }
    records.emplace(t.name, from_record(t));
  }

  ck.model.visit_params([&](const std::string& name, Tensor& t) {
    auto it = records.find("param/" + name);
    if (it == records.end())
      throw std::runtime_error("checkpoint is missing parameter " + name);
    assign_checked(name, it->second, t.v);
  });

  std::map<std::string, std::pair<Mat, Mat>> moments;
  for (const auto& [name, m] : records) {
    if (name.rfind("adam/m/", 0) == 0) {
      const std::string param = name.substr(7);
      auto vit = records.find("adam/v/" + param);
      if (vit == records.end())
        throw std::runtime_error("checkpoint has m but not v moment for " + param);
      moments.emplace(param, std::make_pair(m, vit->second));
    }
  }
  if (!moments.empty()) ck.optimizer.restore(ck.step, std::move(moments));
  return ck;
}

}  // namespace geodtr
