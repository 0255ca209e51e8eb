#include "ckm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "ckm/errors.hpp"
#include "ckm/quantiles.hpp"
#include "ckm/format.hpp"
#include "ckm/log.hpp"

namespace ckm {

namespace {

void require_names(const std::vector<std::string>& names, Eigen::Index cols,
                   const char* which) {
  if (static_cast<Eigen::Index>(names.size()) != cols) {
    throw DataError(std::string(which) + " name count (" +
                    std::to_string(names.size()) + ") does not match column count (" +
                    std::to_string(cols) + ")");
  }
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd inputs, Eigen::MatrixXd outputs,
                 std::vector<std::string> input_names,
                 std::vector<std::string> output_names)
    : inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      input_names_(std::move(input_names)),
      output_names_(std::move(output_names)) {
  if (inputs_.rows() != outputs_.rows()) {
    throw DataError("input rows (" + std::to_string(inputs_.rows()) +
                    ") != output rows (" + std::to_string(outputs_.rows()) + ")");
  }
  require_names(input_names_, inputs_.cols(), "input");
  require_names(output_names_, outputs_.cols(), "output");
  if (!inputs_.allFinite() || !outputs_.allFinite()) {
    throw DataError("dataset contains NaN or infinite entries");
  }
}

Sample Dataset::sample(Eigen::Index i) const {
  if (i < 0 || i >= size()) {
    throw std::out_of_range("sample index " + std::to_string(i) +
                            " out of range [0, " + std::to_string(size()) + ")");
  }
  return Sample{inputs_.row(i).transpose(), outputs_.row(i).transpose()};
}

Dataset Dataset::select(const std::vector<Eigen::Index>& rows) const {
  Eigen::MatrixXd in(static_cast<Eigen::Index>(rows.size()), input_dim());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), output_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Eigen::Index r = rows[i];
    if (r < 0 || r >= size()) {
      throw std::out_of_range("row index " + std::to_string(r) + " out of range");
    }
    in.row(static_cast<Eigen::Index>(i)) = inputs_.row(r);
    out.row(static_cast<Eigen::Index>(i)) = outputs_.row(r);
  }
  return Dataset(std::move(in), std::move(out), input_names_, output_names_);
}

SplitBundle split(const Dataset& d, const SplitFractions& f, std::uint64_t seed,
                  bool shuffled) {
  const double fracs[4] = {f.train, f.calibration, f.test, f.extrapolation};
  for (double v : fracs) {
    if (!(v >= 0.0)) throw DataError("split fractions must be nonnegative");
  }
  const double sum = fracs[0] + fracs[1] + fracs[2] + fracs[3];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DataError("split fractions sum to " + format_double(sum) + ", expected 1");
  }
  const Eigen::Index n = d.size();
  if (n < 1) throw DataError("cannot split an empty dataset");

  // floor(N*f) for the three held-out parts; the remainder goes to train.
  Eigen::Index sizes[4];
  for (int i = 1; i < 4; ++i) {
    sizes[i] = floor_index(static_cast<double>(n) * fracs[i]);
  }
  sizes[0] = n - sizes[1] - sizes[2] - sizes[3];
  const char* part_names[4] = {"train", "calibration", "test", "extrapolation"};
  for (int i = 0; i < 4; ++i) {
    if (fracs[i] > 0.0 && sizes[i] == 0) {
      throw DataError(std::string("dataset too small: requested nonzero ") +
                      part_names[i] + " fraction yields zero samples");
    }
  }
  if (sizes[0] < 1) throw DataError("split leaves train part empty");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (shuffled) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  SplitBundle out;
  Dataset* parts[4] = {&out.train, &out.calibration, &out.test, &out.extrapolation};
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    std::vector<Eigen::Index> rows(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                   order.begin() + static_cast<std::ptrdiff_t>(pos) +
                                       static_cast<std::ptrdiff_t>(sizes[i]));
    *parts[i] = d.select(rows);
    pos += static_cast<std::size_t>(sizes[i]);
  }
  return out;
}

Standardizer::Standardizer(Eigen::VectorXd mean, Eigen::VectorXd stddev)
    : mean_(std::move(mean)), std_(std::move(stddev)) {
  if (mean_.size() != std_.size()) {
    throw DataError("standardizer mean/std size mismatch");
  }
  if ((std_.array() < kStdFloor).any()) {
    throw DataError("standardizer std entries below floor");
  }
}

Standardizer fit_standardizer(const Dataset& d) {
  if (d.size() < 2) throw DataError("standardizer needs at least 2 samples");
  const Eigen::MatrixXd& x = d.inputs();
  const double n = static_cast<double>(x.rows());
  Standardizer s;
  s.mean_ = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - s.mean_.transpose();
  s.std_ = (centered.array().square().colwise().sum() / n).sqrt();
  for (Eigen::Index c = 0; c < s.std_.size(); ++c) {
    if (s.std_[c] < Standardizer::kStdFloor) {
      s.std_[c] = Standardizer::kStdFloor;
      s.clamped_.push_back(c);
      log::warn("standardizer: column " + std::to_string(c) + " (" +
                d.input_names()[static_cast<std::size_t>(c)] +
                ") is constant; std clamped to floor");
    }
  }
  return s;
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& u) const {
  if (u.size() != dim()) throw DataError("standardizer dimension mismatch");
  return (u - mean_).cwiseQuotient(std_);
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& inputs) const {
  if (inputs.cols() != dim()) throw DataError("standardizer dimension mismatch");
  return (inputs.rowwise() - mean_.transpose()).array().rowwise() /
         std_.transpose().array();
}

Dataset Standardizer::apply(const Dataset& d) const {
  return Dataset(apply(d.inputs()), d.outputs(), d.input_names(), d.output_names());
}

Eigen::VectorXd Standardizer::invert(const Eigen::VectorXd& z) const {
  if (z.size() != dim()) throw DataError("standardizer dimension mismatch");
  return z.cwiseProduct(std_) + mean_;
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& z) const {
  if (z.cols() != dim()) throw DataError("standardizer dimension mismatch");
  return (z.array().rowwise() * std_.transpose().array()).matrix().rowwise() +
         mean_.transpose();
}

double ecdf(const Eigen::Ref<const Eigen::VectorXd>& values, double query) {
  if (values.size() == 0) throw DataError("ecdf of empty value list");
  if (!values.allFinite()) throw DataError("ecdf values must be finite");
  const Eigen::Index count = (values.array() <= query).count();
  return static_cast<double>(count) / static_cast<double>(values.size());
}

double ks_statistic(const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() == 0 || b.size() == 0) {
    throw DataError("ks_statistic needs nonempty samples");
  }
  std::vector<double> sa(a.data(), a.data() + a.size());
  std::vector<double> sb(b.data(), b.data() + b.size());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t ia = 0, ib = 0;
  double gap = 0.0;
  while (ia < sa.size() && ib < sb.size()) {
    const double v = std::min(sa[ia], sb[ib]);
    while (ia < sa.size() && sa[ia] <= v) ++ia;
    while (ib < sb.size() && sb[ib] <= v) ++ib;
    gap = std::max(gap, std::abs(static_cast<double>(ia) / na -
                                 static_cast<double>(ib) / nb));
  }
  return gap;
}

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

namespace {

// RFC-4180 record reader: quoted fields may contain commas, doubled quotes
// and line breaks. CRLF and LF both accepted.
std::vector<std::vector<std::string>> read_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  // Skip a UTF-8 BOM if present.
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB &&
      static_cast<unsigned char>(text[2]) == 0xBF) {
    i = 3;
  }
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
        break;
    }
  }
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path,
                  std::size_t row, std::size_t col,
                  const std::vector<std::string>& header) {
  auto fail = [&](const std::string& what) -> DataError {
    const std::string col_name =
        col < header.size() ? " ('" + header[col] + "')" : "";
    return DataError(path.string() + ": row " + std::to_string(row) +
                     ", column " + std::to_string(col + 1) + col_name + ": " +
                     what + " '" + cell + "'");
  };
  std::size_t begin = cell.find_first_not_of(" \t");
  std::size_t last = cell.find_last_not_of(" \t");
  if (begin == std::string::npos) throw fail("non-numeric value");
  const char* first = cell.data() + begin;
  const char* end = cell.data() + last + 1;
  if (*first == '+') ++first;  // from_chars rejects a leading plus
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, end, value);
  if (ec != std::errc{} || ptr != end) throw fail("non-numeric value");
  if (!std::isfinite(value)) throw fail("non-finite value");
  return value;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

Dataset load_csv_impl(const std::filesystem::path& path, Eigen::Index n_inputs,
                      bool allow_empty) {
  if (n_inputs < 1) throw DataError("n_inputs must be >= 1");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto records = read_records(buf.str());
  if (records.empty()) throw DataError(path.string() + ": empty file, header row required");

  const std::vector<std::string>& header = records[0];
  const auto total_cols = static_cast<Eigen::Index>(header.size());
  if (total_cols < n_inputs + 1) {
    throw DataError(path.string() + ": header has " + std::to_string(total_cols) +
                    " columns, need at least n_inputs + 1 = " +
                    std::to_string(n_inputs + 1));
  }
  const Eigen::Index n_outputs = total_cols - n_inputs;
  const auto n_rows = static_cast<Eigen::Index>(records.size()) - 1;
  if (n_rows < 1 && !allow_empty) {
    throw DataError(path.string() + ": no data rows");
  }

  Eigen::MatrixXd inputs(n_rows, n_inputs);
  Eigen::MatrixXd outputs(n_rows, n_outputs);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& rec = records[static_cast<std::size_t>(r) + 1];
    if (static_cast<Eigen::Index>(rec.size()) != total_cols) {
      throw DataError(path.string() + ": row " + std::to_string(r + 1) +
                      ": expected " + std::to_string(total_cols) + " fields, got " +
                      std::to_string(rec.size()));
    }
    for (Eigen::Index c = 0; c < total_cols; ++c) {
      const double v = parse_cell(rec[static_cast<std::size_t>(c)], path,
                                  static_cast<std::size_t>(r) + 1,
                                  static_cast<std::size_t>(c), header);
      if (c < n_inputs) inputs(r, c) = v;
      else outputs(r, c - n_inputs) = v;
    }
  }
  std::vector<std::string> in_names(header.begin(), header.begin() + n_inputs);
  std::vector<std::string> out_names(header.begin() + n_inputs, header.end());
  return Dataset(std::move(inputs), std::move(outputs), std::move(in_names),
                 std::move(out_names));
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, Eigen::Index n_inputs) {
  return load_csv_impl(path, n_inputs, /*allow_empty=*/false);
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  std::string line;
  for (std::size_t i = 0; i < d.input_names().size(); ++i) {
    if (i) line += ',';
    line += csv_escape(d.input_names()[i]);
  }
  for (const auto& name : d.output_names()) {
    line += ',';
    line += csv_escape(name);
  }
  out << line << '\n';
  for (Eigen::Index r = 0; r < d.size(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < d.input_dim(); ++c) {
      if (c) line += ',';
      line += format_double(d.inputs()(r, c));
    }
    for (Eigen::Index c = 0; c < d.output_dim(); ++c) {
      line += ',';
      line += format_double(d.outputs()(r, c));
    }
    out << line << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void save_bundle(const SplitBundle& bundle, const std::filesystem::path& dir,
                 const BundleManifest& manifest) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const Dataset*> parts[4] = {
      {"train", &bundle.train},
      {"calibration", &bundle.calibration},
      {"test", &bundle.test},
      {"extrapolation", &bundle.extrapolation}};
  nlohmann::json files = nlohmann::json::object();
  nlohmann::json sizes = nlohmann::json::object();
  for (const auto& [name, part] : parts) {
    const std::string file = std::string(name) + ".csv";
    save_csv(*part, dir / file);
    files[name] = file;
    sizes[name] = part->size();
  }
  nlohmann::json m;
  m["seed"] = manifest.seed;
  if (manifest.fractions) {
    m["fractions"] = {{"train", manifest.fractions->train},
                      {"calibration", manifest.fractions->calibration},
                      {"test", manifest.fractions->test},
                      {"extrapolation", manifest.fractions->extrapolation}};
  } else {
    m["fractions"] = nullptr;
  }
  m["input_names"] = bundle.train.input_names();
  m["output_names"] = bundle.train.output_names();
  m["n_inputs"] = bundle.train.input_dim();
  m["sizes"] = sizes;
  m["files"] = files;
  if (!manifest.extra.is_null()) m["generator"] = manifest.extra;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw DataError("cannot write manifest: " + (dir / "manifest.json").string());
  out << m.dump(2) << '\n';
}

SplitBundle load_bundle(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest: " + manifest_path.string());
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad manifest " + manifest_path.string() + ": " + e.what());
  }
  const auto n_inputs = m.at("n_inputs").get<Eigen::Index>();
  SplitBundle bundle;
  const std::pair<const char*, Dataset*> parts[4] = {
      {"train", &bundle.train},
      {"calibration", &bundle.calibration},
      {"test", &bundle.test},
      {"extrapolation", &bundle.extrapolation}};
  for (const auto& [name, part] : parts) {
    const std::string file = m.at("files").at(name).get<std::string>();
    *part = load_csv_impl(dir / file, n_inputs, /*allow_empty=*/true);
    const auto expected = m.at("sizes").at(name).get<Eigen::Index>();
    if (part->size() != expected) {
      throw DataError(std::string("bundle part '") + name + "' has " +
                      std::to_string(part->size()) + " rows, manifest says " +
                      std::to_string(expected));
    }
    if (part->input_names() != bundle.train.input_names() ||
        part->output_names() != bundle.train.output_names()) {
      throw DataError(std::string("bundle part '") + name +
                      "' column names differ from train part");
    }
  }
  return bundle;
}

}  // namespace ckm
