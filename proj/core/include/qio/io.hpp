#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "qio/family.hpp"
#include "qio/linear_system.hpp"
#include "qio/operator_core.hpp"
#include "qio/records.hpp"
#include "qio/sysid.hpp"

namespace qio::io {

using json = nlohmann::json;

/// Parses a JSON file. Syntax errors become Errc::parse_error with
/// "path:line:column: ..." in the message.
json read_json_file(const std::filesystem::path& path);
json parse_json(const std::string& text, const std::string& source = "<string>");
/// Pretty-printed with a trailing newline; output is byte-stable.
void write_json_file(const std::filesystem::path& path, const json& value);

json to_json(const Matrix& m);
json to_json(const Vector& v);
Matrix matrix_from_json(const json& j, const std::string& what);
Vector vector_from_json(const json& j, const std::string& what);

/// {"dim", "H_re", "H_im", "L_re", "L_im"}, row-major d x d.
QMarkovModel model_from_json(const json& j);
json to_json(const QMarkovModel& model);

/// {"kind": "diffusive", "dt", "increments"} or {"kind": "counting", "horizon", "jumps"}.
MeasurementRecord record_from_json(const json& j);
json to_json(const MeasurementRecord& record);

/// {"n", "A", "B", "C", "D"}; D defaults to the identity.
LinearQSystem linear_system_from_json(const json& j);
json to_json(const LinearQSystem& g);

/// {"kind": "affine", "model": {...}, "H_dirs": [{"re", "im"}], "L_dirs": [...],
///  "lower": [...], "upper": [...]} or {"kind": "phase", "model", "lower", "upper"}.
ParameterFamily family_from_json(const json& j);

/// {"dt", "inputs": [[...], [...]], "outputs": [...], "split"}.
SysIdDataset dataset_from_json(const json& j);
json to_json(const SysIdDataset& data);

/// Pipeline config; "system_file" / "dataset_file" resolve against `base_dir`.
PipelineConfig pipeline_config_from_json(const json& j, const std::filesystem::path& base_dir);
json to_json(const SysIdResult& result);

/// Report envelope: {"tool", "version", "command", "config", ...body}.
json report(const std::string& command, const json& config, json body);

}  // namespace qio::io
