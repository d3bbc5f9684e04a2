#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causalkit/errors.hpp"
#include "causalkit/inquiry.hpp"

using namespace causalkit;

namespace {

const std::vector<std::string> kCodes = {"EG.CFT.ACCS.RU.ZS", "EG.CFT.ACCS.UR.ZS", "SP.URB.TOTL.IN.ZS"};

struct Expected {
    Category label;
    const char* text;
};

const std::vector<Expected> kMixed = {
    // UnderstandingVariables
    {Category::Direct, "What does EG.CFT.ACCS.RU.ZS represent in the context of global carbon emissions?"},
    {Category::Influential, "How might urban access to clean fuels (EG.CFT.ACCS.UR.ZS) impact carbon emissions?"},
    {Category::Facilitative,
     "What is the significance of SP.URB.TOTL.IN.ZS in studying urbanization effects on the environment?"},
    {Category::Influential, "How do these variables interact to influence overall carbon emissions?"},
    // HistoricalDataAnalysis
    {Category::Resultative, "What trends are observable in EG.CFT.ACCS.RU.ZS over the last decade?"},
    {Category::Resultative, "Has there been a significant change in EG.CFT.ACCS.UR.ZS data in major industrial countries?"},
    {Category::Resultative, "How has the urban population percentage (SP.URB.TOTL.IN.ZS) changed in emerging economies?"},
    {Category::Influential, "What historical events have significantly impacted these variables?"},
    // PredictiveModeling
    {Category::Resultative, "Can we predict future trends in EG.CFT.ACCS.RU.ZS using past data?"},
    {Category::Influential, "How might changes in EG.CFT.ACCS.UR.ZS predict shifts in urban carbon emissions?"},
    {Category::Facilitative, "What models can forecast the growth of urban populations (SP.URB.TOTL.IN.ZS)?"},
    {Category::Preventative,
     "What are the potential future scenarios for these variables under different policy implementations?"},
    // PolicyImpactEvaluation
    {Category::Influential, "How have recent policies affected rural access to clean technologies (EG.CFT.ACCS.RU.ZS)?"},
    {Category::Resultative,
     "What are the environmental impacts of improved urban access to clean fuels (EG.CFT.ACCS.UR.ZS)?"},
    {Category::Influential,
     "How does urbanization measured by SP.URB.TOTL.IN.ZS correlate with national carbon emission policies?"},
    {Category::Preventative, "What policy measures could potentially alter the trends in these variables most effectively?"},
};

const std::vector<Expected> kWhy = {
    // UnderstandingVariables
    {Category::Direct, "Why does EG.CFT.ACCS.RU.ZS matter in the context of global carbon emissions?"},
    {Category::Influential, "Why might urban access to clean fuels (EG.CFT.ACCS.UR.ZS) influence carbon emissions?"},
    {Category::Facilitative,
     "Why is SP.URB.TOTL.IN.ZS significant when studying the effects of urbanization on the environment?"},
    {Category::Influential, "Why do these variables interact to influence overall carbon emissions?"},
    // HistoricalDataAnalysis
    {Category::Resultative, "Why are there observable trends in EG.CFT.ACCS.RU.ZS over the last decade?"},
    {Category::Resultative, "Why has there been a significant change in EG.CFT.ACCS.UR.ZS data in major industrial countries?"},
    {Category::Resultative, "Why has the urban population percentage (SP.URB.TOTL.IN.ZS) changed in emerging economies?"},
    {Category::Influential, "Why have certain historical events significantly impacted these variables?"},
    // PredictiveModeling
    {Category::Resultative, "Why can past data on EG.CFT.ACCS.RU.ZS be used to predict future trends?"},
    {Category::Influential, "Why might changes in EG.CFT.ACCS.UR.ZS predict shifts in urban carbon emissions?"},
    {Category::Facilitative,
     "Why are certain models effective at forecasting the growth of urban populations (SP.URB.TOTL.IN.ZS)?"},
    {Category::Preventative,
     "Why could potential future scenarios for these variables differ under various policy implementations?"},
    // PolicyImpactEvaluation
    {Category::Influential, "Why have recent policies affected rural access to clean technologies (EG.CFT.ACCS.RU.ZS)?"},
    {Category::Resultative, "Why do improved urban access to clean fuels (EG.CFT.ACCS.UR.ZS) have environmental impacts?"},
    {Category::Influential,
     "Why does urbanization, as measured by SP.URB.TOTL.IN.ZS, correlate with national carbon emission policies?"},
    {Category::Preventative, "Why might certain policy measures most effectively alter the trends in these variables?"},
};

std::vector<CausalQuestion> full_battery(Style style) {
    VerbLexicon lexicon = VerbLexicon::standard();
    std::vector<CausalQuestion> all;
    for (Theme theme : {Theme::UnderstandingVariables, Theme::HistoricalDataAnalysis, Theme::PredictiveModeling,
                        Theme::PolicyImpactEvaluation}) {
        auto batch = generate_questions(kCodes, theme, style, lexicon);
        all.insert(all.end(), batch.begin(), batch.end());
    }
    return all;
}

}  // namespace

TEST_CASE("mixed battery is reproduced byte for byte") {
    auto questions = full_battery(Style::Mixed);
    REQUIRE(questions.size() == kMixed.size());
    for (size_t i = 0; i < questions.size(); ++i) {
        CHECK(questions[i].text == kMixed[i].text);
        CHECK(questions[i].annotated_category == kMixed[i].label);
        CHECK(questions[i].style == Style::Mixed);
        CHECK(questions[i].variables == kCodes);
    }
}

TEST_CASE("why battery is reproduced byte for byte") {
    auto questions = full_battery(Style::Why);
    REQUIRE(questions.size() == kWhy.size());
    for (size_t i = 0; i < questions.size(); ++i) {
        CHECK(questions[i].text == kWhy[i].text);
        CHECK(questions[i].annotated_category == kWhy[i].label);
        CHECK(questions[i].style == Style::Why);
    }
}

TEST_CASE("both styles together yield 32 questions") {
    CHECK(full_battery(Style::Mixed).size() + full_battery(Style::Why).size() == 32);
}

TEST_CASE("every generated question round-trips through the classifier") {
    VerbLexicon lexicon = VerbLexicon::standard();
    for (Style style : {Style::Mixed, Style::Why})
        for (const CausalQuestion& q : full_battery(style)) CHECK(classify_question(q.text, lexicon) == q.category);
}

TEST_CASE("every lexicon phrase classifies to its own category") {
    VerbLexicon lexicon = VerbLexicon::standard();
    for (const auto& [category, phrase_list] : lexicon.phrases)
        for (const std::string& phrase : phrase_list) CHECK(classify_question(phrase, lexicon) == category);
}

TEST_CASE("classifier examples") {
    VerbLexicon lexicon = VerbLexicon::standard();
    CHECK(classify_question("How does urbanization influence carbon emissions?", lexicon) == Category::Influential);
    CHECK(classify_question("What prevents an increase in carbon emissions?", lexicon) == Category::Preventative);
    CHECK(classify_question("What is the capital of France?", lexicon) == Category::NonCausal);
    CHECK(classify_question("Higher density RESULTS   IN lower emissions.", lexicon) == Category::Resultative);
    CHECK(classify_question("caused", lexicon) == Category::Resultative);  // inflection of "cause"
    CHECK(classify_question("", lexicon) == Category::NonCausal);
}

TEST_CASE("generate_questions contracts") {
    VerbLexicon lexicon = VerbLexicon::standard();
    CHECK_THROWS_AS(generate_questions({}, Theme::PredictiveModeling, Style::Mixed, lexicon), ContractError);
    // Fewer codes than slots: substitution cycles.
    auto questions = generate_questions({"ONLY"}, Theme::UnderstandingVariables, Style::Mixed, lexicon);
    CHECK(questions[2].text.find("ONLY") != std::string::npos);
}

TEST_CASE("lexicon json round trip and collision detection") {
    VerbLexicon lexicon = VerbLexicon::standard();
    VerbLexicon back = VerbLexicon::from_json(lexicon.to_json());
    CHECK(back.phrases == lexicon.phrases);
    CHECK_THROWS_AS(VerbLexicon::from_json(R"({"Direct": ["boost"], "Influential": ["Boost"]})"), ConfigError);
    CHECK_THROWS_AS(VerbLexicon::from_json(R"({"Sideways": ["boost"]})"), ConfigError);
}

TEST_CASE("name round trips") {
    for (Category c : {Category::Direct, Category::Preventative, Category::Facilitative, Category::Resultative,
                       Category::Influential, Category::NonCausal})
        CHECK(category_from_name(category_name(c)) == c);
    for (Theme t : {Theme::UnderstandingVariables, Theme::HistoricalDataAnalysis, Theme::PredictiveModeling,
                    Theme::PolicyImpactEvaluation})
        CHECK(theme_from_name(theme_name(t)) == t);
    CHECK(style_from_name("mixed") == Style::Mixed);
    CHECK(style_from_name("why") == Style::Why);
    CHECK_THROWS_AS(style_from_name("prose"), ConfigError);
}

TEST_CASE("questions_to_json carries every field") {
    VerbLexicon lexicon = VerbLexicon::standard();
    auto questions = generate_questions(kCodes, Theme::PolicyImpactEvaluation, Style::Why, lexicon);
    std::string json = questions_to_json(questions);
    for (const char* key : {"\"text\"", "\"category\"", "\"annotated_category\"", "\"theme\"", "\"style\"", "\"variables\""})
        CHECK(json.find(key) != std::string::npos);
    CHECK(json.find("PolicyImpactEvaluation") != std::string::npos);
}

TEST_CASE("render_prompt is deterministic and lists context") {
    CausalQuestion q;
    q.text = "Why do these variables interact?";
    DiscoveryContext context;
    context.edges = {{"A", "B"}, {"B", "C"}};
    context.variable_descriptions = {{"A", "first"}, {"B", "second"}};
    std::string prompt = render_prompt(q, context);
    CHECK(prompt.rfind(q.text, 0) == 0);
    CHECK(prompt.find("A -> B\n") != std::string::npos);
    CHECK(prompt.find("B -> C\n") != std::string::npos);
    CHECK(prompt.find("A: first\n") != std::string::npos);
    CHECK(prompt == render_prompt(q, context));
    CHECK(render_prompt(q, {}) == q.text);
}

TEST_CASE("prompt hash is a stable 16-digit hex fnv") {
    CHECK(prompt_hash("") == "cbf29ce484222325");
    CHECK(prompt_hash("a") == "af63dc4c8601ec8c");
    CHECK(prompt_hash("hello") == "a430d84680aabd0b");
    CHECK(prompt_hash("hello") == prompt_hash("hello"));
    CHECK(prompt_hash("hello") != prompt_hash("hellp"));
}

TEST_CASE("fixture transport replays canned responses by hash") {
    FixtureTransport transport({{prompt_hash("ping"), "pong"}});
    CHECK(transport.send({"ping", "fixture", 0.0}) == "pong");
    CHECK_THROWS_AS(transport.send({"unknown", "fixture", 0.0}), InquiryError);

    FixtureTransport parsed = FixtureTransport::from_json(R"({")" + prompt_hash("q") + R"(": "a"})");
    CHECK(parsed.send({"q", "fixture", 0.0}) == "a");
}

TEST_CASE("inquiry client retries and audits every attempt") {
    class FlakyTransport : public Transport {
    public:
        int calls = 0;
        std::string send(const TransportRequest&) override {
            if (++calls < 3) throw InquiryError("transient");
            return "ok";
        }
    };

    FlakyTransport flaky;
    InquiryClient client(flaky, {});  // default retries = 2 -> three attempts
    std::vector<std::string> audit;
    client.set_audit_sink([&](const std::string& prompt) { audit.push_back(prompt); });
    CHECK(client.inquire("question") == "ok");
    CHECK(flaky.calls == 3);
    CHECK(audit == std::vector<std::string>(3, "question"));

    class DeadTransport : public Transport {
    public:
        std::string send(const TransportRequest&) override { throw InquiryError("down"); }
    };
    DeadTransport dead;
    InquiryClient failing(dead, {});
    CHECK_THROWS_AS(failing.inquire("question"), InquiryError);
}
