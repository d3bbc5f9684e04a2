#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace causalkit {

enum class Category { Direct, Preventative, Facilitative, Resultative, Influential, NonCausal };
enum class Theme { UnderstandingVariables, HistoricalDataAnalysis, PredictiveModeling, PolicyImpactEvaluation };
enum class Style { Mixed, Why };

std::string category_name(Category category);
Category category_from_name(const std::string& name);
std::string theme_name(Theme theme);
Theme theme_from_name(const std::string& name);
std::string style_name(Style style);
Style style_from_name(const std::string& name);

// Verb phrases per causal category. Phrases are lowercase; no phrase may
// appear under two categories.
struct VerbLexicon {
    std::map<Category, std::vector<std::string>> phrases;

    static VerbLexicon standard();
    std::string to_json() const;
    static VerbLexicon from_json(const std::string& text);
};

// Surface classification: longest matched (inflected) phrase wins, ties
// broken by the fixed priority Resultative > Preventative > Facilitative
// > Direct > Influential; no match is NonCausal.
Category classify_question(const std::string& text, const VerbLexicon& lexicon);

struct CausalQuestion {
    std::string text;
    Category category = Category::NonCausal;   // lexicon classification of the text
    Category annotated_category = Category::NonCausal;  // the battery's fixed label
    Theme theme = Theme::UnderstandingVariables;
    Style style = Style::Mixed;
    std::vector<std::string> variables;
};

// Instantiates the fixed four-question battery for one theme and style,
// substituting variable codes cyclically into the template slots.
std::vector<CausalQuestion> generate_questions(const std::vector<std::string>& codes, Theme theme, Style style,
                                               const VerbLexicon& lexicon);

std::string questions_to_json(const std::vector<CausalQuestion>& questions);

struct DiscoveryContext {
    std::vector<std::pair<std::string, std::string>> edges;  // from -> to
    std::vector<std::pair<std::string, std::string>> variable_descriptions;
};

std::string render_prompt(const CausalQuestion& question, const DiscoveryContext& context);

// Stable FNV-1a 64 hex digest used to key fixture transports.
std::string prompt_hash(const std::string& prompt);

struct TransportRequest {
    std::string prompt;
    std::string model;
    double temperature = 0.0;
};

// Abstract request/response port; real transports live outside this
// artifact.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string send(const TransportRequest& request) = 0;
};

// Replays canned responses keyed by prompt hash.
class FixtureTransport : public Transport {
public:
    explicit FixtureTransport(std::map<std::string, std::string> responses) : responses_(std::move(responses)) {}
    static FixtureTransport from_json(const std::string& text);
    std::string send(const TransportRequest& request) override;

private:
    std::map<std::string, std::string> responses_;
};

struct InquiryParams {
    std::string model = "fixture";
    double temperature = 0.0;
    int retries = 2;
};

class InquiryClient {
public:
    InquiryClient(Transport& transport, InquiryParams params) : transport_(transport), params_(std::move(params)) {}

    // Called with the outgoing prompt before each send, for run manifests.
    void set_audit_sink(std::function<void(const std::string&)> sink) { audit_ = std::move(sink); }

    std::string inquire(const std::string& prompt);

private:
    Transport& transport_;
    InquiryParams params_;
    std::function<void(const std::string&)> audit_;
};

}  // namespace causalkit
