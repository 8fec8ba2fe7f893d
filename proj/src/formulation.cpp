#include "latent/formulation.hpp"

#include <algorithm>
#include <cctype>

#include "latent/analysis.hpp"
#include "latent/error.hpp"
#include "latent/text.hpp"

namespace latent {

std::string_view to_string(Role role) { return role == Role::activate ? "activate" : "suppress"; }

namespace {

struct Token {
  enum Kind { word, number, punct, separator, end } kind;
  std::string text;
  std::size_t line, column;
};

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (c == '\n' || c == ';') {
      out.push_back({Token::separator, std::string(1, c), line, col});
      advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == ':' || c == '[' || c == ']' || c == '~' || c == '=') {
      out.push_back({Token::punct, std::string(1, c), line, col});
      advance(1);
      continue;
    }
    const std::size_t start = i, l = line, cl = col;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-') {
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '.' ||
                                 ((text[i] == '+' || text[i] == '-') &&
                                  (i == start || text[i - 1] == 'e' || text[i - 1] == 'E'))))
        advance(1);
      out.push_back({Token::number, std::string(text.substr(start, i - start)), l, cl});
      continue;
    }
    if (word_char(c)) {
      while (i < text.size() && word_char(text[i])) advance(1);
      out.push_back({Token::word, std::string(text.substr(start, i - start)), l, cl});
      continue;
    }
    throw ParseError("unexpected character", line, col, std::string(1, c));
  }
  out.push_back({Token::end, "", line, col});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, double default_epsilon)
      : tokens_(std::move(tokens)), default_epsilon_(default_epsilon) {}

  FormulationPlan parse() {
    FormulationPlan plan;
    while (true) {
      while (peek().kind == Token::separator) ++pos_;
      if (peek().kind == Token::end) break;
      if (plan.stages.empty()) first_role_ = peek();
      plan.stages.push_back(statement());
      if (peek().kind != Token::separator && peek().kind != Token::end) fail("expected ';' or end of line", peek());
    }
    if (plan.stages.empty()) fail("empty plan", peek());
    if (plan.stages.front().role != Role::activate) fail("plan must start with an activate stage", first_role_);
    return plan;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }
  [[noreturn]] void fail(const std::string& what, const Token& t) const {
    throw ParseError(what, t.line, t.column, t.text);
  }
  void expect(const char* punct) {
    const Token& t = take();
    if (t.kind != Token::punct || t.text != punct) fail(std::string("expected '") + punct + "'", t);
  }

  PlanStage statement() {
    PlanStage stage;
    const Token& role = take();
    if (role.kind != Token::word || (role.text != "activate" && role.text != "suppress"))
      fail("expected 'activate' or 'suppress'", role);
    stage.role = role.text == "activate" ? Role::activate : Role::suppress;
    if (stage.role == Role::activate) {
      if (seen_activate_) fail("only one activate stage is allowed", role);
      seen_activate_ = true;
    }
    expect(":");

    const Token& crit = take();
    if (crit.kind != Token::word) fail("expected a criterion id", crit);
    const auto kind = parse_criterion_kind(crit.text);
    if (!kind) fail("unknown criterion", crit);
    stage.criterion.kind = *kind;

    if (peek().kind == Token::punct && peek().text == "[") {
      if (!takes_region(*kind)) fail("criterion takes no region", peek());
      ++pos_;
      if (peek().kind == Token::punct && peek().text == "~") {
        stage.criterion.complement = true;
        ++pos_;
      }
      const Token& region = take();
      if (region.kind != Token::word) fail("expected a region name", region);
      const auto names = *kind == CriterionKind::fl ? landmark_group_names() : pixel_region_names();
      if (std::find(names.begin(), names.end(), region.text) == names.end()) fail("unknown region", region);
      stage.criterion.region = region.text;
      expect("]");
    } else if (takes_region(*kind)) {
      fail("criterion needs a [region]", peek());
    }

    stage.epsilon = default_epsilon_;
    if (peek().kind == Token::word && peek().text == "eps") {
      ++pos_;
      expect("=");
      const Token& num = take();
      const auto v = num.kind == Token::number ? parse_double(num.text) : std::nullopt;
      if (!v) fail("expected a number", num);
      if (!(*v > 0.0 && *v < 1.0)) fail("eps must lie in (0, 1)", num);
      stage.epsilon = *v;
    }
    return stage;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  double default_epsilon_;
  bool seen_activate_ = false;
  Token first_role_{Token::end, "", 1, 1};
};

}  // namespace

FormulationPlan parse_plan(std::string_view text, double default_epsilon) {
  return Parser(tokenize(text), default_epsilon).parse();
}

std::string print_plan(const FormulationPlan& plan) {
  std::string out;
  for (const auto& s : plan.stages) {
    if (!out.empty()) out += "; ";
    out += std::string(to_string(s.role)) + ": " + s.criterion.label() + " eps=" + format_double(s.epsilon);
  }
  return out;
}

const std::map<std::string, std::string>& formulation_library() {
  static const std::map<std::string, std::string> library = {
      {"skin_color", "activate: mac[skin]; suppress: res[~skin]"},
      {"face_boundary", "activate: fl[face]; suppress: fl[~face]; suppress: ap[face]"},
      {"face_boundary_id", "activate: fl[face]; suppress: fl[~face]; suppress: ap[face]; suppress: id"},
      {"mouth_shape", "activate: fl[mouth]; suppress: fl[~mouth]; suppress: ap[face]"},
      {"mouth_shape_id", "activate: fl[mouth]; suppress: fl[~mouth]; suppress: ap[face]; suppress: id"},
      {"mouth_photometry", "activate: mp[mouth]; suppress: mp[~mouth]"},
      {"mouth_photometry_id", "activate: mp[mouth]; suppress: mp[~mouth]; suppress: id"},
      {"lip_color", "activate: mac[lip]; suppress: res[~lip]"},
      {"lip_photometry", "activate: mp[lip]; suppress: mp[~lip]"},
      {"eye_photometry", "activate: mp[eye]; suppress: mp[~eye]"},
      {"eye_shape", "activate: fl[eye]; suppress: fl[~eye]; suppress: ap[eye]"},
      {"nose_photometry", "activate: mp[nose]; suppress: mp[~nose]"},
      {"high_frequency", "activate: high; suppress: low"},
      {"hair_photometry", "activate: mp[hair]; suppress: mp[~hair]"},
      {"background_photometry", "activate: mp[background]; suppress: mp[~background]"},
  };
  return library;
}

FormulationPlan resolve_plan(std::string_view name_or_text, double default_epsilon) {
  const auto& lib = formulation_library();
  const auto it = lib.find(std::string(trim(name_or_text)));
  return parse_plan(it != lib.end() ? std::string_view(it->second) : name_or_text, default_epsilon);
}

}  // namespace latent
