#pragma once

#include <string>

#include "json.hpp"
#include "rtlevo/bandit.hpp"
#include "rtlevo/record.hpp"
#include "rtlevo/types.hpp"

namespace rtlevo {

using Json = nlohmann::json;

// Version stamped into every persisted record and report.
inline constexpr int kSchemaVersion = 1;

// Non-finite doubles are stored as the strings "-inf", "inf" and "nan".
Json real_to_json(double x);
double real_from_json(const Json& j);

void to_json(Json& j, const PpaMetrics& m);
void from_json(const Json& j, PpaMetrics& m);
void to_json(Json& j, const EvalOutcome& o);
void from_json(const Json& j, EvalOutcome& o);
void to_json(Json& j, const Lineage& l);
void from_json(const Json& j, Lineage& l);
void to_json(Json& j, const Individual& ind);
void from_json(const Json& j, Individual& ind);
void to_json(Json& j, const StrategyStats& s);
void from_json(const Json& j, StrategyStats& s);
void to_json(Json& j, const BanditSnapshot& b);
void from_json(const Json& j, BanditSnapshot& b);
void to_json(Json& j, const StrategyEvent& e);
void from_json(const Json& j, StrategyEvent& e);
void to_json(Json& j, const GenerationRecord& r);
void from_json(const Json& j, GenerationRecord& r);

// One line of generations.jsonl, without the trailing newline.
std::string record_to_line(const GenerationRecord& rec);
// Throws Error naming the line when the text is not a valid record.
GenerationRecord record_from_line(const std::string& line, std::size_t line_number);

}  // namespace rtlevo
