#include "juice/trial_record.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace juice {

namespace {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      data.push_back(m(i, j).real());
      data.push_back(m(i, j).imag());
    }
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMatrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(2 * rows * cols))
    throw std::runtime_error("trial record: matrix data has the wrong length");
  CMatrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index jj = 0; jj < cols; ++jj) {
      const double re = data[k++].get<double>();
      const double im = data[k++].get<double>();
      m(i, jj) = Complex{re, im};
    }
  }
  return m;
}

}  // namespace

std::string trial_record_to_json(const TrialRecord& r) {
  json j{{"sweep_value", r.sweep_value},
         {"snr_db", r.snr_db},
         {"trial", r.trial},
         {"noise_variance", r.noise_variance},
         {"support", r.support},
         {"phi", matrix_to_json(r.phi)},
         {"x", matrix_to_json(r.x)},
         {"y", matrix_to_json(r.y)}};
  return j.dump();
}

TrialRecord trial_record_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    TrialRecord r;
    r.sweep_value = j.at("sweep_value").get<double>();
    r.snr_db = j.at("snr_db").get<double>();
    r.trial = j.at("trial").get<int>();
    r.noise_variance = j.at("noise_variance").get<double>();
    r.support = j.at("support").get<IndexSet>();
    r.phi = matrix_from_json(j.at("phi"));
    r.x = matrix_from_json(j.at("x"));
    r.y = matrix_from_json(j.at("y"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("trial record: ") + e.what());
  }
}

void write_trial_records(std::ostream& os, const std::vector<TrialRecord>& records) {
  for (const auto& r : records) os << trial_record_to_json(r) << '\n';
}

std::vector<TrialRecord> read_trial_records(std::istream& is) {
  std::vector<TrialRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) out.push_back(trial_record_from_json(line));
  }
  return out;
}

}  // namespace juice
