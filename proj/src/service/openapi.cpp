#include "leadsheet/service/service.h"

namespace leadsheet::service {

using nlohmann::json;

namespace {

json schema_ref(const std::string& name) { return {{"$ref", "#/components/schemas/" + name}}; }

json enum_of(std::initializer_list<const char*> values) {
  json e = json::array();
  for (const char* v : values) e.push_back(v);
  return {{"type", "string"}, {"enum", e}};
}

json json_body(const json& schema) {
  return {{"required", true}, {"content", {{"application/json", {{"schema", schema}}}}}};
}

json responses(std::initializer_list<std::pair<const char*, const char*>> codes,
               const std::string& ok_schema) {
  json out = json::object();
  for (const auto& [code, text] : codes) {
    json r = {{"description", text}};
    const std::string c = code;
    r["content"] = {{"application/json", {{"schema", schema_ref(c == "200" ? ok_schema : "Error")}}}};
    out[c] = r;
  }
  return out;
}

}  // namespace

json openapi_document() {
  json schemas = {
      {"BarCondition",
       {{"type", "object"},
        {"required", {"time_signature", "valence", "density"}},
        {"properties",
         {{"time_signature", enum_of({"4/4", "3/4", "2/2", "2/4", "6/8"})},
          {"grouping", enum_of({"auto", "first1", "first2", "mid", "last2", "last1"})},
          {"valence", enum_of({"Low", "ModerateLow", "Neutral", "ModerateHigh", "High"})},
          {"density", enum_of({"low", "medium", "high"})}}}}},
      {"Sampler",
       {{"type", "object"},
        {"properties",
         {{"temperature", {{"type", "number"}, {"nullable", true}}},
          {"min_temperature", {{"type", "number"}, {"default", 0.8}}},
          {"max_temperature", {{"type", "number"}, {"default", 1.2}}},
          {"greedy", {{"type", "boolean"}, {"default", false}}},
          {"max_length", {{"type", "integer"}}}}}}},
      {"GenerationRequest",
       {{"type", "object"},
        {"required", {"model", "bars"}},
        {"properties",
         {{"model", {{"type", "string"}}},
          {"bars", {{"type", "array"}, {"minItems", 1}, {"maxItems", 32}, {"items", schema_ref("BarCondition")}}},
          {"sampler", schema_ref("Sampler")},
          {"seed", {{"type", "integer"}, {"minimum", 0}}}}}}},
      {"GenerationResponse",
       {{"type", "object"},
        {"properties",
         {{"api_version", {{"type", "integer"}}},
          {"model", {{"type", "string"}}},
          {"seed", {{"type", "integer"}}},
          {"temperature", {{"type", "number"}}},
          {"sheet", schema_ref("LeadSheet")},
          {"tokens", {{"type", "array"}, {"items", {{"type", "string"}}}}},
          {"bars", {{"type", "array"}, {"items", {{"type", "object"}}}}},
          {"piece_valence", {{"type", "object"}, {"nullable", true}}},
          {"musicxml", {{"type", "string"}}}}}}},
      {"TemplateRequest",
       {{"type", "object"},
        {"required", {"profile", "bars"}},
        {"properties",
         {{"profile", {{"type", "string"}}},
          {"bars", {{"type", "integer"}, {"minimum", 1}, {"maximum", 32}}},
          {"seed", {{"type", "integer"}, {"minimum", 0}}}}}}},
      {"TemplateResponse",
       {{"type", "object"},
        {"properties",
         {{"api_version", {{"type", "integer"}}},
          {"profile", {{"type", "string"}}},
          {"bars", {{"type", "array"}, {"items", schema_ref("BarCondition")}}}}}}},
      {"LeadSheet",
       {{"type", "object"},
        {"required", {"key", "bars"}},
        {"description", "One sheet in the corpus file layout."}}},
      {"ValenceResponse",
       {{"type", "object"},
        {"properties",
         {{"api_version", {{"type", "integer"}}},
          {"bars", {{"type", "array"}, {"items", {{"type", "object"}}}}},
          {"piece", {{"type", "object"}, {"nullable", true}}}}}}},
      {"MetricsRequest",
       {{"type", "object"},
        {"description",
         "One of: {\"sheet\": LeadSheet}, {\"sheets\": [LeadSheet]}, {\"corpus\": name} or a "
         "corpus document. Optional \"label\"."}}},
      {"MetricReport", {{"type", "object"}}},
      {"Models", {{"type", "object"}}},
      {"Vocab", {{"type", "object"}}},
      {"Error",
       {{"type", "object"},
        {"properties",
         {{"api_version", {{"type", "integer"}}},
          {"error",
           {{"type", "object"},
            {"properties", {{"status", {{"type", "integer"}}}, {"message", {{"type", "string"}}}}}}}}}}},
  };

  json paths = {
      {"/generate",
       {{"post",
         {{"summary", "Generate a lead sheet for per-bar conditions"},
          {"requestBody", json_body(schema_ref("GenerationRequest"))},
          {"responses", responses({{"200", "Generated sheet with requested and realized conditions"},
                                   {"400", "Invalid conditions or sampler settings"},
                                   {"404", "Unknown model"},
                                   {"500", "Generation hit the length limit"}},
                                  "GenerationResponse")}}}}},
      {"/template",
       {{"post",
         {{"summary", "Sample a condition template from a statistics profile"},
          {"requestBody", json_body(schema_ref("TemplateRequest"))},
          {"responses",
           responses({{"200", "Condition track"}, {"400", "Bad request"}, {"404", "Unknown profile"}},
                     "TemplateResponse")}}}}},
      {"/valence",
       {{"post",
         {{"summary", "Per-bar and piece valence of a lead sheet"},
          {"requestBody", json_body(schema_ref("LeadSheet"))},
          {"responses", responses({{"200", "Valence"},
                                   {"400", "Malformed sheet"},
                                   {"422", "Chord quality without a valence"}},
                                  "ValenceResponse")}}}}},
      {"/metrics",
       {{"post",
         {{"summary", "Evaluation metrics of a sheet or corpus"},
          {"requestBody", json_body(schema_ref("MetricsRequest"))},
          {"responses",
           responses({{"200", "Metric report"}, {"400", "Malformed input"}, {"404", "Unknown corpus"}},
                     "MetricReport")}}}}},
      {"/models",
       {{"get", {{"summary", "Loaded models and statistics profiles"},
                 {"responses", responses({{"200", "Registry contents"}}, "Models")}}}}},
      {"/vocab",
       {{"get",
         {{"summary", "Token inventories, of a model when ?model= is given"},
          {"parameters",
           {{{"name", "model"}, {"in", "query"}, {"required", false}, {"schema", {{"type", "string"}}}}}},
          {"responses", responses({{"200", "Vocabularies"}, {"404", "Unknown model"}}, "Vocab")}}}}},
      {"/openapi.json",
       {{"get", {{"summary", "This document"}, {"responses", {{"200", {{"description", "OpenAPI"}}}}}}}}},
  };

  return {{"openapi", "3.0.3"},
          {"info", {{"title", "leadsheet service"}, {"version", std::to_string(kApiVersion)}}},
          {"paths", paths},
          {"components", {{"schemas", schemas}}}};
}

}  // namespace leadsheet::service
