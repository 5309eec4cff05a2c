// Internal JSON mappings shared by the file formats.
#ifndef MMSGUARD_JSON_CODEC_H
#define MMSGUARD_JSON_CODEC_H

#include "mmsguard/baseline.h"
#include "mmsguard/error.h"

#include <json.hpp>

namespace mmsguard::json_codec {

using nlohmann::json;

json time_acc_to_json(const std::optional<TimeAccuracy>& acc);
std::optional<TimeAccuracy> time_acc_from_json(const json& j, const char* what);

// "0x" + lowercase hex; "0x" alone for empty.
std::string bytes_to_json(const Bytes& b);
Bytes bytes_from_json(const json& j, const char* what);

json record_to_json(const ExtractedRecord& r);
ExtractedRecord record_from_json(const json& j);

json signature_to_json(const AttackSignature& s);
AttackSignature signature_from_json(const json& j);

Service service_from_json(const json& j, const char* what);

// Throws SchemaMismatch naming the field.
const json& require(const json& obj, const char* key);
std::string require_string(const json& obj, const char* key);

json parse_document(std::string_view text, const char* what);

} // namespace mmsguard::json_codec

#endif
