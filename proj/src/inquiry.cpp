#include "causalkit/inquiry.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "causalkit/errors.hpp"

namespace causalkit {

std::string category_name(Category category) {
    switch (category) {
        case Category::Direct: return "Direct";
        case Category::Preventative: return "Preventative";
        case Category::Facilitative: return "Facilitative";
        case Category::Resultative: return "Resultative";
        case Category::Influential: return "Influential";
        case Category::NonCausal: return "NonCausal";
    }
    throw ContractError("unknown category");
}

Category category_from_name(const std::string& name) {
    for (Category c : {Category::Direct, Category::Preventative, Category::Facilitative, Category::Resultative,
                       Category::Influential, Category::NonCausal})
        if (category_name(c) == name) return c;
    throw ConfigError("unknown category: " + name);
}

std::string theme_name(Theme theme) {
    switch (theme) {
        case Theme::UnderstandingVariables: return "UnderstandingVariables";
        case Theme::HistoricalDataAnalysis: return "HistoricalDataAnalysis";
        case Theme::PredictiveModeling: return "PredictiveModeling";
        case Theme::PolicyImpactEvaluation: return "PolicyImpactEvaluation";
    }
    throw ContractError("unknown theme");
}

Theme theme_from_name(const std::string& name) {
    for (Theme t : {Theme::UnderstandingVariables, Theme::HistoricalDataAnalysis, Theme::PredictiveModeling,
                    Theme::PolicyImpactEvaluation})
        if (theme_name(t) == name) return t;
    throw ContractError("unknown theme: " + name);
}

std::string style_name(Style style) {
    return style == Style::Mixed ? "mixed" : "why";
}

Style style_from_name(const std::string& name) {
    if (name == "mixed") return Style::Mixed;
    if (name == "why") return Style::Why;
    throw ConfigError("unknown style: " + name);
}

VerbLexicon VerbLexicon::standard() {
    VerbLexicon lexicon;
    lexicon.phrases[Category::Direct] = {"increase", "trigger"};
    lexicon.phrases[Category::Preventative] = {"prevent", "reduce", "inhibit"};
    lexicon.phrases[Category::Facilitative] = {"enable", "allow", "support"};
    lexicon.phrases[Category::Resultative] = {"lead to", "result in", "cause"};
    lexicon.phrases[Category::Influential] = {"influence", "impact", "affect"};
    return lexicon;
}

std::string VerbLexicon::to_json() const {
    nlohmann::json doc;
    for (const auto& [category, list] : phrases) doc[category_name(category)] = list;
    return doc.dump(2);
}

VerbLexicon VerbLexicon::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    VerbLexicon lexicon;
    std::map<std::string, Category> seen;
    for (auto& [key, list] : doc.items()) {
        Category category = category_from_name(key);
        for (const auto& entry : list) {
            std::string phrase = entry.get<std::string>();
            std::transform(phrase.begin(), phrase.end(), phrase.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            auto [it, inserted] = seen.insert({phrase, category});
            if (!inserted && it->second != category)
                throw ConfigError("phrase '" + phrase + "' appears in two categories");
            lexicon.phrases[category].push_back(phrase);
        }
    }
    return lexicon;
}

namespace {

std::vector<std::string> word_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalpha(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

// Surface match allowing plain verb inflections of the base word.
bool inflected_match(const std::string& token, const std::string& base) {
    if (token == base) return true;
    if (token.size() <= base.size() || token.compare(0, base.size(), base) != 0) return false;
    std::string suffix = token.substr(base.size());
    return suffix == "s" || suffix == "es" || suffix == "d" || suffix == "ed" || suffix == "ing";
}

constexpr std::array<Category, 5> kPriority = {Category::Resultative, Category::Preventative, Category::Facilitative,
                                               Category::Direct, Category::Influential};

int priority_rank(Category category) {
    for (size_t i = 0; i < kPriority.size(); ++i)
        if (kPriority[i] == category) return static_cast<int>(i);
    return static_cast<int>(kPriority.size());
}

}  // namespace

Category classify_question(const std::string& text, const VerbLexicon& lexicon) {
    std::vector<std::string> tokens = word_tokens(text);
    Category best = Category::NonCausal;
    size_t best_len = 0;
    for (const auto& [category, phrase_list] : lexicon.phrases) {
        for (const auto& phrase : phrase_list) {
            std::vector<std::string> words = word_tokens(phrase);
            if (words.empty()) continue;
            for (size_t t = 0; t + words.size() <= tokens.size(); ++t) {
                if (!inflected_match(tokens[t], words[0])) continue;
                bool matched = true;
                size_t surface = tokens[t].size();
                for (size_t w = 1; w < words.size(); ++w) {
                    if (tokens[t + w] != words[w]) {
                        matched = false;
                        break;
                    }
                    surface += 1 + tokens[t + w].size();
                }
                if (!matched) continue;
                if (surface > best_len ||
                    (surface == best_len && priority_rank(category) < priority_rank(best))) {
                    best = category;
                    best_len = surface;
                }
            }
        }
    }
    return best;
}

namespace {

struct QuestionTemplate {
    Category label;
    const char* mixed;
    const char* why;
};

// The fixed battery: four themes, four questions each, mixed and why
// variants. {0}/{1}/{2} are variable-code slots.
const std::array<std::array<QuestionTemplate, 4>, 4> kBattery = {{
    // UnderstandingVariables
    {{{Category::Direct, "What does {0} represent in the context of global carbon emissions?",
       "Why does {0} matter in the context of global carbon emissions?"},
      {Category::Influential, "How might urban access to clean fuels ({1}) impact carbon emissions?",
       "Why might urban access to clean fuels ({1}) influence carbon emissions?"},
      {Category::Facilitative, "What is the significance of {2} in studying urbanization effects on the environment?",
       "Why is {2} significant when studying the effects of urbanization on the environment?"},
      {Category::Influential, "How do these variables interact to influence overall carbon emissions?",
       "Why do these variables interact to influence overall carbon emissions?"}}},
    // HistoricalDataAnalysis
    {{{Category::Resultative, "What trends are observable in {0} over the last decade?",
       "Why are there observable trends in {0} over the last decade?"},
      {Category::Resultative, "Has there been a significant change in {1} data in major industrial countries?",
       "Why has there been a significant change in {1} data in major industrial countries?"},
      {Category::Resultative, "How has the urban population percentage ({2}) changed in emerging economies?",
       "Why has the urban population percentage ({2}) changed in emerging economies?"},
      {Category::Influential, "What historical events have significantly impacted these variables?",
       "Why have certain historical events significantly impacted these variables?"}}},
    // PredictiveModeling
    {{{Category::Resultative, "Can we predict future trends in {0} using past data?",
       "Why can past data on {0} be used to predict future trends?"},
      {Category::Influential, "How might changes in {1} predict shifts in urban carbon emissions?",
       "Why might changes in {1} predict shifts in urban carbon emissions?"},
      {Category::Facilitative, "What models can forecast the growth of urban populations ({2})?",
       "Why are certain models effective at forecasting the growth of urban populations ({2})?"},
      {Category::Preventative,
       "What are the potential future scenarios for these variables under different policy implementations?",
       "Why could potential future scenarios for these variables differ under various policy implementations?"}}},
    // PolicyImpactEvaluation
    {{{Category::Influential, "How have recent policies affected rural access to clean technologies ({0})?",
       "Why have recent policies affected rural access to clean technologies ({0})?"},
      {Category::Resultative, "What are the environmental impacts of improved urban access to clean fuels ({1})?",
       "Why do improved urban access to clean fuels ({1}) have environmental impacts?"},
      {Category::Influential, "How does urbanization measured by {2} correlate with national carbon emission policies?",
       "Why does urbanization, as measured by {2}, correlate with national carbon emission policies?"},
      {Category::Preventative,
       "What policy measures could potentially alter the trends in these variables most effectively?",
       "Why might certain policy measures most effectively alter the trends in these variables?"}}},
}};

int theme_index(Theme theme) {
    switch (theme) {
        case Theme::UnderstandingVariables: return 0;
        case Theme::HistoricalDataAnalysis: return 1;
        case Theme::PredictiveModeling: return 2;
        case Theme::PolicyImpactEvaluation: return 3;
    }
    throw ContractError("unknown theme");
}

std::string substitute(const std::string& tmpl, const std::vector<std::string>& codes) {
    std::string out;
    for (size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{' && i + 2 < tmpl.size() && std::isdigit(static_cast<unsigned char>(tmpl[i + 1])) &&
            tmpl[i + 2] == '}') {
            size_t slot = static_cast<size_t>(tmpl[i + 1] - '0');
            out += codes[slot % codes.size()];
            i += 2;
        } else {
            out.push_back(tmpl[i]);
        }
    }
    return out;
}

}  // namespace

std::vector<CausalQuestion> generate_questions(const std::vector<std::string>& codes, Theme theme, Style style,
                                               const VerbLexicon& lexicon) {
    if (codes.empty()) throw ContractError("generate_questions requires at least one variable code");
    std::vector<CausalQuestion> questions;
    for (const QuestionTemplate& tmpl : kBattery[theme_index(theme)]) {
        CausalQuestion q;
        q.text = substitute(style == Style::Mixed ? tmpl.mixed : tmpl.why, codes);
        q.category = classify_question(q.text, lexicon);
        q.annotated_category = tmpl.label;
        q.theme = theme;
        q.style = style;
        q.variables = codes;
        questions.push_back(std::move(q));
    }
    return questions;
}

std::string questions_to_json(const std::vector<CausalQuestion>& questions) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& q : questions) {
        doc.push_back({{"text", q.text},
                       {"category", category_name(q.category)},
                       {"annotated_category", category_name(q.annotated_category)},
                       {"theme", theme_name(q.theme)},
                       {"style", style_name(q.style)},
                       {"variables", q.variables}});
    }
    return doc.dump(2);
}

std::string render_prompt(const CausalQuestion& question, const DiscoveryContext& context) {
    std::ostringstream out;
    out << question.text;
    if (!context.edges.empty()) {
        out << "\n\nDiscovered causal relationships:\n";
        for (const auto& [from, to] : context.edges) out << from << " -> " << to << "\n";
    }
    if (!context.variable_descriptions.empty()) {
        out << "\nVariable descriptions:\n";
        for (const auto& [code, description] : context.variable_descriptions) out << code << ": " << description << "\n";
    }
    return out.str();
}

std::string prompt_hash(const std::string& prompt) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : prompt) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << hash;
    return out.str();
}

FixtureTransport FixtureTransport::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    std::map<std::string, std::string> responses;
    for (auto& [key, value] : doc.items()) responses[key] = value.get<std::string>();
    return FixtureTransport(std::move(responses));
}

std::string FixtureTransport::send(const TransportRequest& request) {
    auto it = responses_.find(prompt_hash(request.prompt));
    if (it == responses_.end()) throw InquiryError("no canned response for prompt hash " + prompt_hash(request.prompt));
    return it->second;
}

std::string InquiryClient::inquire(const std::string& prompt) {
    TransportRequest request{prompt, params_.model, params_.temperature};
    int attempts = params_.retries + 1;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (audit_) audit_(prompt);
        try {
            return transport_.send(request);
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw InquiryError("inquiry failed after " + std::to_string(attempts) + " attempts: " + last_error);
}

}  // namespace causalkit
