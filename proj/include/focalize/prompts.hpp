#pragma once

#include <string>
#include <vector>

#include "focalize/corpus.hpp"

namespace focalize::llm {

/// A zero-shot instruction template. `body` is byte-exact; rendering appends
/// the excerpt after an "EXCERPT:" heading and never alters the body.
struct PromptTemplate {
    std::string prompt_id;  // "base" or an ablation "v1".."v5"
    std::string body;
};

/// All known template ids, base first.
const std::vector<std::string>& prompt_ids();

/// Looks up a template by id. Throws UnknownPrompt for anything else.
PromptTemplate prompt_template(const std::string& prompt_id);

/// body + "\n\nEXCERPT:\n" + excerpt text. Throws DataError on empty text.
std::string build_prompt(const PromptTemplate& tmpl, const corpus::Excerpt& excerpt);

}  // namespace focalize::llm
