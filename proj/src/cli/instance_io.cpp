#include "nswx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace nswx::cli {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& problem) {
  throw InstanceFormatError(field + ": " + problem);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing");
  return *it;
}

std::string require_id(const json& obj, const std::string& path) {
  const json& id = require(obj, "id", path);
  if (!id.is_string()) schema_error(path + ".id", "must be a string");
  return id.get<std::string>();
}

double require_number(const json& value, const std::string& path) {
  if (!value.is_number()) schema_error(path, "must be a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) schema_error(path, "must be finite");
  return x;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void emit(const json& value, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* colon = indent > 0 ? ": " : ":";
  switch (value.type()) {
    case json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = value.begin(); it != value.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += pad;
        out += json(it.key()).dump();
        out += colon;
        emit(it.value(), indent, depth + 1, out);
      }
      out += close;
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const json& x : value) {
        if (!first) out += ',';
        first = false;
        out += pad;
        emit(x, indent, depth + 1, out);
      }
      out += close;
      out += ']';
      return;
    }
    case json::value_t::number_float:
      out += format_double(value.get<double>());
      return;
    default:
      out += value.dump();
  }
}

}  // namespace

std::string to_json_text(const json& value, int indent) {
  std::string out;
  emit(value, indent, 0, out);
  out += '\n';
  return out;
}

Instance InstanceFile::to_instance() const {
  Vector w(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) w(static_cast<Eigen::Index>(i)) = weights[i];
  return Instance::create(valuations, w);
}

InstanceFile parse_instance_file(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
    int line = 1;
    std::size_t line_start = 0;
    for (std::size_t k = 0; k < offset; ++k) {
      if (text[k] == '\n') {
        ++line;
        line_start = k + 1;
      }
    }
    const std::size_t line_end = text.find('\n', line_start);
    const std::string context = text.substr(line_start, line_end == std::string::npos ? std::string::npos : line_end - line_start);
    const std::size_t column = offset - line_start + 1;
    std::ostringstream os;
    os << "JSON syntax error at line " << line << ", column " << column << ": " << context;
    throw InstanceFormatError(os.str());
  }
  if (!doc.is_object()) schema_error("$", "top level must be an object");

  InstanceFile f;
  const json& version = require(doc, "schema_version", "$");
  if (!version.is_string()) schema_error("$.schema_version", "must be a string");
  f.schema_version = version.get<std::string>();
  if (f.schema_version != "1.0") schema_error("$.schema_version", "unsupported version '" + f.schema_version + "'");

  const json& agents = require(doc, "agents", "$");
  if (!agents.is_array() || agents.empty()) schema_error("$.agents", "must be a non-empty array");
  std::map<std::string, int> agent_index, item_index;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string path = "$.agents[" + std::to_string(i) + "]";
    if (!agents[i].is_object()) schema_error(path, "must be an object");
    const std::string id = require_id(agents[i], path);
    if (!agent_index.emplace(id, static_cast<int>(i)).second) schema_error(path + ".id", "duplicate id '" + id + "'");
    const double w = require_number(require(agents[i], "weight", path), path + ".weight");
    if (w <= 0.0) schema_error(path + ".weight", "must be positive");
    f.agent_ids.push_back(id);
    f.weights.push_back(w);
  }

  const json& items = require(doc, "items", "$");
  if (!items.is_array() || items.empty()) schema_error("$.items", "must be a non-empty array");
  for (std::size_t j = 0; j < items.size(); ++j) {
    const std::string path = "$.items[" + std::to_string(j) + "]";
    if (!items[j].is_object()) schema_error(path, "must be an object");
    const std::string id = require_id(items[j], path);
    if (!item_index.emplace(id, static_cast<int>(j)).second) schema_error(path + ".id", "duplicate id '" + id + "'");
    f.item_ids.push_back(id);
  }

  const int n = static_cast<int>(f.agent_ids.size());
  const int m = static_cast<int>(f.item_ids.size());
  f.valuations = Matrix::Zero(n, m);
  const json& vals = require(doc, "valuations", "$");
  if (!vals.is_array()) schema_error("$.valuations", "must be an array");
  const bool dense = !vals.empty() && vals[0].is_array();
  if (dense) {
    if (static_cast<int>(vals.size()) != n) schema_error("$.valuations", "dense form needs one row per agent");
    for (int i = 0; i < n; ++i) {
      const std::string row_path = "$.valuations[" + std::to_string(i) + "]";
      if (!vals[i].is_array() || static_cast<int>(vals[i].size()) != m) {
        schema_error(row_path, "must be an array with one value per item");
      }
      for (int j = 0; j < m; ++j) {
        const std::string path = row_path + "[" + std::to_string(j) + "]";
        const double x = require_number(vals[i][j], path);
        if (x < 0.0) schema_error(path, "must be non-negative");
        f.valuations(i, j) = x;
      }
    }
  } else {
    std::set<std::pair<int, int>> seen;
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const std::string path = "$.valuations[" + std::to_string(k) + "]";
      if (!vals[k].is_object()) schema_error(path, "must be an object {agent, item, value}");
      const json& a = require(vals[k], "agent", path);
      const json& g = require(vals[k], "item", path);
      if (!a.is_string()) schema_error(path + ".agent", "must be a string id");
      if (!g.is_string()) schema_error(path + ".item", "must be a string id");
      auto ai = agent_index.find(a.get<std::string>());
      if (ai == agent_index.end()) schema_error(path + ".agent", "unknown agent '" + a.get<std::string>() + "'");
      auto gi = item_index.find(g.get<std::string>());
      if (gi == item_index.end()) schema_error(path + ".item", "unknown item '" + g.get<std::string>() + "'");
      if (!seen.emplace(ai->second, gi->second).second) schema_error(path, "duplicate (agent, item) entry");
      const double x = require_number(require(vals[k], "value", path), path + ".value");
      if (x < 0.0) schema_error(path + ".value", "must be non-negative");
      f.valuations(ai->second, gi->second) = x;
    }
  }
  return f;
}

InstanceFile read_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open instance file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance_file(buf.str());
  } catch (const InstanceFormatError& e) {
    throw InstanceFormatError(path + ": " + e.what());
  }
}

std::string dump_instance_file(const InstanceFile& file) {
  json doc = json::object();
  doc["schema_version"] = file.schema_version;
  doc["agents"] = json::array();
  for (std::size_t i = 0; i < file.agent_ids.size(); ++i) {
    doc["agents"].push_back({{"id", file.agent_ids[i]}, {"weight", file.weights[i]}});
  }
  doc["items"] = json::array();
  for (const auto& id : file.item_ids) doc["items"].push_back({{"id", id}});
  doc["valuations"] = json::array();
  for (int i = 0; i < file.valuations.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < file.valuations.cols(); ++j) row.push_back(file.valuations(i, j));
    doc["valuations"].push_back(row);
  }
  return to_json_text(doc, 2);
}

LoadedInstance load_instance(const std::string& path) {
  InstanceFile file = read_instance_file(path);
  Instance inst = file.to_instance();
  LoadedInstance out{std::move(file), std::move(inst), {}};
  const double scale = out.instance.raw_weight_sum();
  if (std::abs(scale - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << scale << "; rescaled to sum to 1";
    out.warnings.push_back(os.str());
  }
  return out;
}

}  // namespace nswx::cli
