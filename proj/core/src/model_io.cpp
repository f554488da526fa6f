#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "adaam/adaam.hpp"
#include "adaam/error.hpp"

namespace adaam {
namespace {

constexpr int kModelFormatVersion = 1;

using nlohmann::json;

template <typename T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw Error(ErrorCode::BadModel, std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadModel, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string serialize_model(const AdaamModel& model) {
  const ResolvedConfig& rc = model.config;
  const DenseMatrix& a = model.projection.map;
  std::vector<double> means(model.column_means.data(),
                            model.column_means.data() + model.column_means.size());
  // DenseMatrix is row-major, so data() is already in the on-disk order.
  std::vector<double> flat(a.data(), a.data() + a.size());

  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["method"] = std::string(to_string(rc.method));
  doc["n"] = rc.n;
  doc["d"] = rc.d;
  doc["c"] = rc.clusters;
  doc["k"] = rc.neighbours;
  doc["m"] = rc.dimension;
  doc["alpha1"] = rc.alpha1;
  doc["alpha2"] = rc.alpha2;
  doc["bandwidth"] = rc.bandwidth;
  doc["squared_kernel"] = rc.squared_kernel;
  doc["iterations"] = rc.iterations;
  doc["column_means"] = means;
  doc["A"] = flat;
  return doc.dump(2) + "\n";
}

AdaamModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadModel, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::BadModel, "model document is not an object");
  const int version = field<int>(doc, "format_version");
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::BadModel, "unsupported format_version " + std::to_string(version));
  }

  AdaamModel model;
  ResolvedConfig& rc = model.config;
  const std::string method = doc.value("method", std::string("adaam"));
  if (method == "adaam") {
    rc.method = Method::Adaam;
  } else if (method == "knn-lpp") {
    rc.method = Method::KnnLpp;
  } else {
    throw Error(ErrorCode::BadModel, "unknown method '" + method + "'");
  }
  rc.n = field<std::size_t>(doc, "n");
  rc.d = field<std::size_t>(doc, "d");
  rc.clusters = field<std::size_t>(doc, "c");
  rc.neighbours = field<std::size_t>(doc, "k");
  rc.dimension = field<std::size_t>(doc, "m");
  rc.alpha1 = field<double>(doc, "alpha1");
  rc.alpha2 = field<double>(doc, "alpha2");
  rc.bandwidth = field<double>(doc, "bandwidth");
  rc.iterations = field<std::size_t>(doc, "iterations");
  rc.squared_kernel = doc.value("squared_kernel", false);

  const auto means = field<std::vector<double>>(doc, "column_means");
  const auto flat = field<std::vector<double>>(doc, "A");
  if (means.size() != rc.d) throw Error(ErrorCode::BadModel, "column_means length differs from d");
  if (flat.size() != rc.d * rc.dimension) throw Error(ErrorCode::BadModel, "A has wrong element count");

  model.column_means = Eigen::Map<const Vector>(means.data(), static_cast<Eigen::Index>(means.size()));
  model.projection.map = Eigen::Map<const DenseMatrix>(flat.data(), static_cast<Eigen::Index>(rc.d),
                                                       static_cast<Eigen::Index>(rc.dimension));
  if (!model.projection.map.allFinite() || !model.column_means.allFinite()) {
    throw Error(ErrorCode::BadModel, "non-finite model values");
  }
  model.metric = metric_of(model.projection.map);
  return model;
}

void save_model(const AdaamModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << serialize_model(model);
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

AdaamModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

}  // namespace adaam
