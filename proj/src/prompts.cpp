#include "focalize/prompts.hpp"

#include <string_view>

#include "focalize/errors.hpp"

namespace focalize::llm {
namespace {

// Bodies are pinned byte-for-byte (note the U+2019 in "characters’"). Each
// ablation keeps the base wording and only deletes or substitutes text; the
// deltas are spelled out in full so the bytes can be audited in place.

constexpr std::string_view kBaseBody =
R"(Please state how the given novel excerpt is focalized, or the perspective through which narrative information is provided. There are three modes of focalization:

- INTERNAL: From the perspective of a particular character. Describes what the character knows, including their thoughts, behaviors, and emotions.
- EXTERNAL: From the perspective of an outside narrator. Describes characters’ actions, behaviors, and settings. Communicates physically observable facts.
- ZERO: From every perspective. The narration has an omniscient point of view and can describe the thoughts, behaviors, emotions, and actions of any character.

Speech in quotation marks counts as external focalization. Only respond with one word representing the mode of focalization.)";

// v1: drops ", or the perspective through which narrative information is
// provided" from the opening sentence.
constexpr std::string_view kV1Body =
R"(Please state how the given novel excerpt is focalized. There are three modes of focalization:

- INTERNAL: From the perspective of a particular character. Describes what the character knows, including their thoughts, behaviors, and emotions.
- EXTERNAL: From the perspective of an outside narrator. Describes characters’ actions, behaviors, and settings. Communicates physically observable facts.
- ZERO: From every perspective. The narration has an omniscient point of view and can describe the thoughts, behaviors, emotions, and actions of any character.

Speech in quotation marks counts as external focalization. Only respond with one word representing the mode of focalization.)";

// v2: rewrites the opening sentence and drops every "focalization" outside
// the bullet list ("three modes:", "counts as external.", "the mode.").
constexpr std::string_view kV2Body =
R"(Please state the perspective through which narrative information is provided in the given novel excerpt. There are three modes:

- INTERNAL: From the perspective of a particular character. Describes what the character knows, including their thoughts, behaviors, and emotions.
- EXTERNAL: From the perspective of an outside narrator. Describes characters’ actions, behaviors, and settings. Communicates physically observable facts.
- ZERO: From every perspective. The narration has an omniscient point of view and can describe the thoughts, behaviors, emotions, and actions of any character.

Speech in quotation marks counts as external. Only respond with one word representing the mode.)";

// v3: drops the leading perspective sentence from each bullet.
constexpr std::string_view kV3Body =
R"(Please state how the given novel excerpt is focalized, or the perspective through which narrative information is provided. There are three modes of focalization:

- INTERNAL: Describes what the character knows, including their thoughts, behaviors, and emotions.
- EXTERNAL: Describes characters’ actions, behaviors, and settings. Communicates physically observable facts.
- ZERO: The narration has an omniscient point of view and can describe the thoughts, behaviors, emotions, and actions of any character.

Speech in quotation marks counts as external focalization. Only respond with one word representing the mode of focalization.)";

// v4: drops everything after the leading perspective sentence in each bullet.
constexpr std::string_view kV4Body =
R"(Please state how the given novel excerpt is focalized, or the perspective through which narrative information is provided. There are three modes of focalization:

- INTERNAL: From the perspective of a particular character.
- EXTERNAL: From the perspective of an outside narrator.
- ZERO: From every perspective.

Speech in quotation marks counts as external focalization. Only respond with one word representing the mode of focalization.)";

// v5: replaces the bullet list with the bare mode names on the intro line.
constexpr std::string_view kV5Body =
R"(Please state how the given novel excerpt is focalized, or the perspective through which narrative information is provided. There are three modes of focalization: INTERNAL, EXTERNAL, ZERO

Speech in quotation marks counts as external focalization. Only respond with one word representing the mode of focalization.)";

struct NamedBody {
    const char* id;
    std::string_view body;
};

constexpr NamedBody kTemplates[] = {
    {"base", kBaseBody}, {"v1", kV1Body}, {"v2", kV2Body},
    {"v3", kV3Body},     {"v4", kV4Body}, {"v5", kV5Body},
};

}  // namespace

const std::vector<std::string>& prompt_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> out;
        for (const auto& t : kTemplates) out.emplace_back(t.id);
        return out;
    }();
    return ids;
}

PromptTemplate prompt_template(const std::string& prompt_id) {
    for (const auto& t : kTemplates) {
        if (prompt_id == t.id) return PromptTemplate{t.id, std::string(t.body)};
    }
    throw UnknownPrompt("unknown prompt id: " + prompt_id);
}

std::string build_prompt(const PromptTemplate& tmpl, const corpus::Excerpt& excerpt) {
    if (excerpt.text.empty()) throw DataError("cannot render a prompt for an empty excerpt");
    std::string out;
    out.reserve(tmpl.body.size() + excerpt.text.size() + 16);
    out += tmpl.body;
    out += "\n\nEXCERPT:\n";
    out += excerpt.text;
    return out;
}

}  // namespace focalize::llm
