#pragma once

#include <string_view>

#include "json.hpp"

namespace kpix::prompts {

/// Few-shot extraction prompt. Placeholders: $tickr, $fiscal_period,
/// $time_of_report, $target_text.
inline constexpr std::string_view kExtractionPromptTemplate =
    R"PROMPT(You are an expert financial entity extractor. Your sole task is to read `### TEXT TO ANALYZE ###` section and extract all entities according to the JSON schema

## Entity Extraction Instructions ##
Entities could be:

* `kpi_name` The name of the metric.
    * **Rule:** Tag the complete noun phrase, including essential modifiers like "net", "gross", "adjusted", "quarterly", or "annual".
    * **Rule:** EXCLUDE non-essential fluff ("strong," "record") and determiners ("a," "the," "our").
    * Examples: "quarterly net revenue", "Google Services operating margins", "retention rate".

* `kpi_value` The *quantifiable* value of the KPI.
    * **Rule:** This must be a numerical value.
    * **Math Rule:** If a range is provided (e.g., "$10-20M"), calculate the arithmetic average for the `Value` field, but record the bounds in the range fields.
    * Examples: "$10B", "70%"

* `qualitative_desc`  A *subjective* or *non-numerical* description of the KPI's performance or trend.
    * **Rule:** This must highlight a specific qualitative milestone.
    * Examples: "strong growth", "stable rate", "increase", "dropping down", "disappointing results", "record number".

* `scope` The specific business unit, product, or market the KPI refers to.
    * Examples: "Cloud Division", "Services Arm", "iPhone", "North American", "Services", "Boeing Commercial", "Boeing Defense and Space"

* `date` The temporal context for the KPI.
    * **Rule:** This should include any relevant time frames or specific dates. Including if something is a future projection or historical fact.
    * Examples: "2024," "Q1 2026," "next year," "in the current quarter," "year to date", "end of year", "expect", "project"*

* `modality` The certainty or context of the fact (e.g., if it's a projection vs. a reported fact).
    * **Rule:** Forward of backwards looking (e.g., "guidance" and "projected").
    * Examples: "projected", "expected", "target", "guidance".

Having identified the entities, you should structure them into groups relating relevant entities together.

### 2. Field Definitions ###
* **Source:** The exact text span from the input from which the metric was derived.
* **Entities:** A list of all relevant entities in the text.
* **Source Value:** The original text value of the metric.
* **Label:** Construct a concise label from the entities in the text this could be `scope`, `kpi_name`, `date` and `modality`. Use only entities present in the source text.
* **Value:** The numerical value as a float. If a range, use the average.
* **Value_NonNumeric:** If the value is a non numerical highlight of performance.
* **Is_Range:** Boolean indicating if the value comes from a range.
* **Top_of_range / Bottom_of_range:** The specific upper/lower bounds if Is_Range is True.

**Label Construction Rule:**
You must generate a standard `Label` for each group to serve as a unique ID.
* **Source:** Use ONLY the text of the entities found in that specific group.
* **Order:** Construct the string in this exact precedence:
    1.  `scope`
    2.  `modality`
    3.  `kpi_name`
    4.  `date`
* **Formatting:** Separate parts with a single space.
* **Example:** If you find Scope="Cloud", KPI="Revenue", Date="Q1", the Label is "Cloud Revenue Q1".

Example 1:
"Quarterly revenues crossed the $10 billion mark for the first time"
Extracted as
{
"Entities": [
        {"text": "Quarterly", "category": "date"},
        {"text": "revenues", "category": "kpi_name"},
        {"text": "$10 billion", "category": "kpi_value"}
    ],
"Groups" : [{
    "Source": "Quarterly revenues crossed the $10 billion mark for the first time",
    "Entities": [
            {"text": "Quarterly", "category": "date"},
            {"text": "revenues", "category": "kpi_name"},
            {"text": "$10 billion", "category": "kpi_value"}
        ],
    "Source Value": "$10 billion",
    "Is_Range": false,
    "Top_of_range": null,
    "Bottom_of_range": null,
    "Value": 10000000000.0,
    "Value_NonNumeric": null,
    "Label": "revenues Quarterly"
}]
}

Example 2:
"Boeing Defense and Space. BDS booked $6 billion in orders during the quarter. Revenue was $5.5 billion"
Extracted as
{
"Entities": [
    {"text": "Boeing Defense and Space", "category": "scope"},
    {"text": "BDS", "category": "scope"},
    {"text": "$6 billion", "category": "kpi_value"},
    {"text": "orders", "category": "kpi_name"},
    {"text": "during the quarter", "category": "date"},
    {"text": "Revenue", "category": "kpi_name"},
    {"text": "$5.5 billion", "category": "kpi_value"}
],
"Groups" : [{
    "Source": "Boeing Defense and Space. BDS booked $6 billion in orders during the quarter",
    "Entities": [
                    {"text": "Boeing Defense and Space", "category": "scope"},
                    {"text": "BDS", "category": "scope"},
                    {"text": "orders", "category": "kpi_name"},
                    {"text": "during the quarter", "category": "date"},
                    {"text": "$6 billion", "category": "kpi_value"}
                ],
    "Source Value": "$6 billion",
    "Is_Range": false,
    "Top_of_range": null,
    "Bottom_of_range": null,
    "Value": 6000000000.0,
    "Value_NonNumeric": null,
    "Label": "Boeing Defense and Space BDS orders during the Quarter"}
,
{
    "Source": "Boeing Defense and Space. BDS booked $6 billion in orders during the quarter. Revenue was $5.5 billion",
    "Entities": [
                    {"text": "Boeing Defense and Space", "category": "scope"},
                    {"text": "BDS", "category": "scope"},
                    {"text": "Revenue", "category": "kpi_name"},
                    {"text": "$5.5 billion", "category": "kpi_value"},
                    {"text": "during the quarter", "category": "date"}
                ],
    "Source Value": "$5.5 billion",
    "Is_Range": false,
    "Top_of_range": null,
    "Bottom_of_range": null,
    "Value": 5500000000.0,
    "Value_NonNumeric": null,
    "Label": "Boeing Defense and Space BDS Revenue during the Quarter"
}]
}

Example 3:
"We expect net income to be in the range of $1.2 billion to $1.4 billion for the fiscal year 2026."
Extracted as
{
    "Entities": [
        {"text": "expect", "category": "modality"},
        {"text": "net income", "category": "kpi_name"},
        {"text": "$1.2 billion", "category": "kpi_value"},
        {"text": "$1.4 billion", "category": "kpi_value"},
      {"text": "fiscal year 2026", "category": "date"}
    ],
    "Groups": [{
        "Source": "We expect net income to be in the range of $1.2 billion to $1.4 billion for the fiscal year 2026.",
        "Entities": [
            {"text": "expect", "category": "modality"},
            {"text": "net income", "category": "kpi_name"},
            {"text": "fiscal year 2026", "category": "date"},
            {"text": "$1.2 billion", "category": "kpi_value"},
            {"text": "$1.4 billion", "category": "kpi_value"}
        ],
        "Label": "expect net income fiscal year 2026",
        "Source Value": "$1.2 billion to $1.4 billion",
        "Value": 1300000000.0,
        "Value_NonNumeric": null,
        "Is_Range": true,
        "Top_of_range": 1400000000.0,
        "Bottom_of_range": 1200000000.0
    }]
}

Example 4:
"We have seen record high use of our AI cloud tool."
Extracted as
{
    "Entities": [
        {"text": "record high", "category": "qualitative_desc"},
        {"text": "use", "category": "kpi_name"},
        {"text": "AI cloud tool", "category": "scope"}
    ],
    "Groups": [{
        "Source": "We have seen record high use of our AI cloud tool.",
        "Entities": [
            {"text": "record high", "category": "qualitative_desc"},
            {"text": "use", "category": "kpi_name"},
            {"text": "AI cloud tool", "category": "scope"}
        ],
        "Label": "AI cloud tool use",
        "Source Value": "record high",
        "Value": null,
        "Value_NonNumeric": "record high",
        "Is_Range": false,
        "Top_of_range": null,
        "Bottom_of_range": null
    }]
}

### 3. Context ###
- **Stock Ticker:** $tickr
- **Fiscal Period:** $fiscal_period
- **Time of Report:** $time_of_report

### 4. TASK ###
Analyze the following text and generate the JSON output.
If no metrics are found, output the structure with empty lists.
Output ONLY the valid JSON object and nothing else.
### TEXT TO ANALYZE ###
<text> $target_text </text>)PROMPT";

/// Equivalence-judge prompt. Placeholders: {context_text}, {value_str},
/// {gt_label}, {pred_label}.
inline constexpr std::string_view kJudgePromptTemplate =
    R"PROMPT(You are a strict financial auditor evaluating an Information Extraction system.

TASK:
Determine if the 'Model Prediction' refers to the same financial concept as the 'Ground Truth', given the context.

CONTEXT TEXT:
"{context_text}"

SHARED VALUE: {value_str}

COMPARISON:
1. Ground Truth Label: "{gt_label}"
2. Model Prediction Label: "{pred_label}"

INSTRUCTIONS:
- If the Model Prediction is a valid synonym or a reasonable extraction of the Ground Truth concept, say YES.
- If the Model Prediction captures a DIFFERENT concept (e.g., "Gross Profit" vs "Net Profit"), say NO.

OUTPUT FORMAT:
Return ONLY a JSON object:
{
  "reasoning": "Brief explanation of your decision",
  "is_equivalent": true or false
})PROMPT";

/// Response-format schema sent to providers that support constrained
/// decoding.
inline nlohmann::json default_extraction_schema() {
  return nlohmann::json{
      {"name", "financial_entity_extraction"},
      {"strict", true},
      {"schema",
       {{"type", "object"},
        {"properties",
         {{"Entities",
           {{"type", "array"},
            {"description",
             "A comprehensive list of all financial entities found in the text, "
             "classified by type."},
            {"items",
             {{"type", "object"},
              {"properties",
               {{"text",
                 {{"type", "string"},
                  {"description",
                   "The exact substring extracted from the source text."}}},
                {"category",
                 {{"type", "string"},
                  {"description", "The classification of the entity."},
                  {"enum", {"kpi_name", "kpi_value", "qualitative_desc", "scope",
                            "date", "modality"}}}}}},
              {"required", {"text", "category"}},
              {"additionalProperties", false}}}}},
          {"Groups",
           {{"type", "array"},
            {"description",
             "Logical groupings of entities that form a single financial fact."},
            {"items",
             {{"type", "object"},
              {"properties",
               {{"Source",
                 {{"type", "string"},
                  {"description",
                   "The full text span containing the fact. Must include previous "
                   "sentences if context (like Scope) is needed."}}},
                {"Entities",
                 {{"type", "array"},
                  {"description",
                   "The subset of entities that belong to this specific fact."},
                  {"items",
                   {{"type", "object"},
                    {"properties",
                     {{"text", {{"type", "string"}}},
                      {"category", {{"type", "string"}}}}},
                    {"required", {"text", "category"}},
                    {"additionalProperties", false}}}}},
                {"Source Value",
                 {{"type", "string"},
                  {"description",
                   "The raw string representation of the value (e.g., '$10-12 "
                   "million')."}}},
                {"Label",
                 {{"type", "string"},
                  {"description",
                   "Unique ID. Strict Order: [Scope] [Modality] [KPI Name] [Date]. "
                   "Use ONLY entities present in this group."}}},
                {"Value",
                 {{"type", {"number", "null"}},
                  {"description",
                   "The numeric representation. If a range, this is the average."}}},
                {"Value_NonNumeric",
                 {{"type", {"string", "null"}},
                  {"description",
                   "The qualitative description if no number exists (e.g. 'record "
                   "high')."}}},
                {"Is_Range",
                 {{"type", "boolean"},
                  {"description",
                   "True if the source mentions a lower and upper bound."}}},
                {"Top_of_range",
                 {{"type", {"number", "null"}},
                  {"description", "The upper bound of the range."}}},
                {"Bottom_of_range",
                 {{"type", {"number", "null"}},
                  {"description", "The lower bound of the range."}}}}},
              {"required", {"Source", "Entities", "Source Value", "Label", "Value",
                            "Value_NonNumeric", "Is_Range", "Top_of_range",
                            "Bottom_of_range"}},
              {"additionalProperties", false}}}}}}},
        {"required", {"Entities", "Groups"}},
        {"additionalProperties", false}}}};
}

}  // namespace kpix::prompts
