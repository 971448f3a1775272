#include "cmekit/netparse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <json.hpp>

namespace cmekit {

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : ModelError([&] {
        if (diagnostics.empty()) diagnostics.push_back({{1, 1}, "parse error", ""});
        std::ostringstream os;
        const auto& d = diagnostics.front();
        os << d.pos.line << ":" << d.pos.column << ": " << d.message;
        if (!d.token.empty()) os << " (at '" << d.token << "')";
        if (diagnostics.size() > 1) os << " [+" << diagnostics.size() - 1 << " more]";
        return os.str();
      }()),
      diagnostics_(std::move(diagnostics)) {}

namespace {

enum class Tok {
  ident,
  number,
  arrow,
  at,
  plus,
  minus,
  star,
  slash,
  lparen,
  rparen,
  equals,
  comma,
  colon,
  end,
  invalid,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  SourcePos pos;
  double value = 0.0;
  bool integer = false;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      Token t;
      t.pos = {line_, col_};
      if (i_ >= src_.size()) {
        t.kind = Tok::end;
        out.push_back(t);
        return out;
      }
      const char c = src_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (i_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
          t.text += advance();
        }
        t.kind = Tok::ident;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        lex_number(t);
      } else {
        t.text = advance();
        switch (c) {
          case '-':
            if (i_ < src_.size() && src_[i_] == '>') {
              t.text += advance();
              t.kind = Tok::arrow;
            } else {
              t.kind = Tok::minus;
            }
            break;
          case '@': t.kind = Tok::at; break;
          case '+': t.kind = Tok::plus; break;
          case '*': t.kind = Tok::star; break;
          case '/': t.kind = Tok::slash; break;
          case '(': t.kind = Tok::lparen; break;
          case ')': t.kind = Tok::rparen; break;
          case '=': t.kind = Tok::equals; break;
          case ',': t.kind = Tok::comma; break;
          case ':': t.kind = Tok::colon; break;
          default: t.kind = Tok::invalid; break;
        }
      }
      out.push_back(std::move(t));
      if (out.back().kind == Tok::invalid) {
        Token e;
        e.kind = Tok::end;
        e.pos = {line_, col_};
        out.push_back(e);
        return out;
      }
    }
  }

 private:
  char advance() {
    const char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_blank() {
    while (i_ < src_.size()) {
      const char c = src_[i_];
      if (c == '#') {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        return;
      }
    }
  }

  void lex_number(Token& t) {
    bool integer = true;
    auto digits = [&] {
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
        t.text += advance();
      }
    };
    digits();
    if (i_ < src_.size() && src_[i_] == '.') {
      integer = false;
      t.text += advance();
      digits();
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      const std::size_t save_i = i_, save_line = line_, save_col = col_;
      const std::string save_text = t.text;
      t.text += advance();
      if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-')) t.text += advance();
      if (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
        integer = false;
        digits();
      } else {  // not an exponent; leave the 'e' for the next token
        i_ = save_i;
        line_ = save_line;
        col_ = save_col;
        t.text = save_text;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) {
      t.kind = Tok::invalid;
      return;
    }
    t.kind = Tok::number;
    t.value = v;
    t.integer = integer;
  }

  std::string_view src_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

bool is_keyword(const std::string& s) {
  return s == "species" || s == "param" || s == "volume" || s == "convention" || s == "init" ||
         s == "reaction";
}

/// Unresolved expression as written; identifiers are bound afterwards.
struct RawExpr {
  enum class Kind { number, ident, mass_action, binary } kind = Kind::number;
  ExprKind op = ExprKind::add;
  double value = 0.0;
  std::string name;
  SourcePos pos;
  std::unique_ptr<RawExpr> lhs;
  std::unique_ptr<RawExpr> rhs;
};

struct RawTerm {
  int coefficient = 1;
  std::string species;
  SourcePos pos;
};

struct RawReaction {
  std::string name;
  std::vector<RawTerm> lhs;
  std::vector<RawTerm> rhs;
  std::unique_ptr<RawExpr> rate;
  SourcePos pos;
};

class SyntaxError {
 public:
  ParseError::Diagnostic d;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  const Token& peek(std::size_t ahead = 0) const {
    return t_[std::min(p_ + ahead, t_.size() - 1)];
  }
  Token take() {
    Token t = peek();
    if (p_ < t_.size() - 1) ++p_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::end; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    std::string tok = t.kind == Tok::end ? "end of input" : t.text;
    throw SyntaxError{{t.pos, msg, tok}};
  }

  Token expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) fail(peek(), "expected " + what);
    return take();
  }

  Token expect_ident(const std::string& what) {
    const Token& t = peek();
    if (t.kind != Tok::ident || is_keyword(t.text)) fail(t, "expected " + what);
    return take();
  }

  std::unique_ptr<RawExpr> expr() {
    auto lhs = term();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      const Token op = take();
      auto n = std::make_unique<RawExpr>();
      n->kind = RawExpr::Kind::binary;
      n->op = op.kind == Tok::plus ? ExprKind::add : ExprKind::subtract;
      n->pos = op.pos;
      n->lhs = std::move(lhs);
      n->rhs = term();
      lhs = std::move(n);
    }
    return lhs;
  }

  std::unique_ptr<RawExpr> term() {
    auto lhs = unary();
    while (peek().kind == Tok::star || peek().kind == Tok::slash) {
      const Token op = take();
      auto n = std::make_unique<RawExpr>();
      n->kind = RawExpr::Kind::binary;
      n->op = op.kind == Tok::star ? ExprKind::multiply : ExprKind::divide;
      n->pos = op.pos;
      n->lhs = std::move(lhs);
      n->rhs = unary();
      lhs = std::move(n);
    }
    return lhs;
  }

  std::unique_ptr<RawExpr> unary() {
    if (peek().kind == Tok::minus) {
      const Token op = take();
      if (peek().kind == Tok::number) {
        const Token num = take();
        auto n = std::make_unique<RawExpr>();
        n->value = -num.value;
        n->pos = op.pos;
        return n;
      }
      auto n = std::make_unique<RawExpr>();
      n->kind = RawExpr::Kind::binary;
      n->op = ExprKind::subtract;
      n->pos = op.pos;
      n->lhs = std::make_unique<RawExpr>();
      n->lhs->pos = op.pos;
      n->rhs = unary();
      return n;
    }
    return primary();
  }

  std::unique_ptr<RawExpr> primary() {
    const Token& t = peek();
    auto n = std::make_unique<RawExpr>();
    n->pos = t.pos;
    if (t.kind == Tok::number) {
      n->value = take().value;
      return n;
    }
    if (t.kind == Tok::lparen) {
      take();
      auto inner = expr();
      expect(Tok::rparen, "')'");
      return inner;
    }
    if (t.kind == Tok::ident && !is_keyword(t.text)) {
      const Token id = take();
      if (peek().kind == Tok::lparen) {
        if (id.text != "mass_action") fail(id, "unknown function");
        take();
        const Token& arg = peek();
        auto coef = std::make_unique<RawExpr>();
        coef->pos = arg.pos;
        if (arg.kind == Tok::number) {
          coef->value = take().value;
        } else if (arg.kind == Tok::ident && !is_keyword(arg.text)) {
          coef->kind = RawExpr::Kind::ident;
          coef->name = take().text;
        } else {
          fail(arg, "mass_action expects a number or a parameter name");
        }
        expect(Tok::rparen, "')'");
        n->kind = RawExpr::Kind::mass_action;
        n->lhs = std::move(coef);
        return n;
      }
      n->kind = RawExpr::Kind::ident;
      n->name = id.text;
      return n;
    }
    fail(t, "expected a number, identifier or '('");
  }

  std::vector<RawTerm> side() {
    std::vector<RawTerm> terms;
    const Token& first = peek();
    if (first.kind == Tok::number && first.integer && first.value == 0.0 &&
        peek(1).kind != Tok::ident) {
      take();
      return terms;
    }
    for (;;) {
      RawTerm term;
      term.pos = peek().pos;
      if (peek().kind == Tok::number) {
        const Token c = take();
        if (!c.integer || c.value < 1 || c.value > 1e6) {
          fail(c, "stoichiometric coefficient must be a positive integer");
        }
        term.coefficient = static_cast<int>(c.value);
      }
      term.species = expect_ident("a species name or '0'").text;
      terms.push_back(std::move(term));
      if (peek().kind != Tok::plus) break;
      take();
    }
    return terms;
  }

  const std::vector<Token>& tokens() const { return t_; }

 private:
  std::vector<Token> t_;
  std::size_t p_ = 0;
};

struct Symbols {
  std::vector<std::string> species;
  std::vector<std::string> parameters;

  std::optional<std::size_t> species_index(const std::string& n) const {
    auto it = std::find(species.begin(), species.end(), n);
    if (it == species.end()) return std::nullopt;
    return static_cast<std::size_t>(it - species.begin());
  }
  std::optional<std::size_t> parameter_index(const std::string& n) const {
    auto it = std::find(parameters.begin(), parameters.end(), n);
    if (it == parameters.end()) return std::nullopt;
    return static_cast<std::size_t>(it - parameters.begin());
  }
};

RateExpression resolve(const RawExpr& raw, const Symbols& sym,
                       std::vector<ParseError::Diagnostic>& diags, bool top) {
  switch (raw.kind) {
    case RawExpr::Kind::number:
      return RateExpression::constant(raw.value);
    case RawExpr::Kind::ident: {
      if (auto s = sym.species_index(raw.name)) return RateExpression::species(raw.name, *s);
      if (auto p = sym.parameter_index(raw.name)) return RateExpression::parameter(raw.name, *p);
      diags.push_back({raw.pos, "unknown identifier '" + raw.name + "'", raw.name});
      return RateExpression::constant(0.0);
    }
    case RawExpr::Kind::mass_action: {
      if (!top) {
        diags.push_back({raw.pos, "mass_action(...) must be the whole rate", "mass_action"});
      }
      const RawExpr& c = *raw.lhs;
      if (c.kind == RawExpr::Kind::number) {
        return RateExpression::mass_action(RateExpression::constant(c.value));
      }
      if (auto p = sym.parameter_index(c.name)) {
        return RateExpression::mass_action(RateExpression::parameter(c.name, *p));
      }
      diags.push_back({c.pos, "mass_action expects a parameter, got '" + c.name + "'", c.name});
      return RateExpression::mass_action(RateExpression::constant(1.0));
    }
    case RawExpr::Kind::binary:
      return RateExpression::binary(raw.op, resolve(*raw.lhs, sym, diags, false),
                                    resolve(*raw.rhs, sym, diags, false));
  }
  return RateExpression::constant(0.0);
}

ParseError::Diagnostic from_syntax(const SyntaxError& e) { return e.d; }

}  // namespace

RateExpression parse_rate_expression(std::string_view text,
                                     const std::vector<std::string>& species,
                                     const std::vector<std::string>& parameters) {
  Parser parser(Lexer(text).run());
  std::unique_ptr<RawExpr> raw;
  try {
    raw = parser.expr();
    if (!parser.at_end()) parser.fail(parser.peek(), "unexpected token after expression");
  } catch (const SyntaxError& e) {
    throw ParseError({from_syntax(e)});
  }
  std::vector<ParseError::Diagnostic> diags;
  Symbols sym{species, parameters};
  RateExpression out = resolve(*raw, sym, diags, true);
  if (!diags.empty()) throw ParseError(std::move(diags));
  return out;
}

ModelDocument parse_model(std::string_view text) {
  Parser parser(Lexer(text).run());

  std::vector<std::pair<std::string, SourcePos>> species;
  std::vector<std::tuple<std::string, double, SourcePos>> params;
  std::vector<RawReaction> reactions;
  std::vector<std::tuple<std::string, long long, SourcePos>> inits;
  std::optional<std::pair<double, SourcePos>> volume;
  std::optional<std::pair<Convention, SourcePos>> convention;
  std::vector<ParseError::Diagnostic> diags;

  try {
    while (!parser.at_end()) {
      const Token kw = parser.peek();
      if (kw.kind != Tok::ident || !is_keyword(kw.text)) {
        parser.fail(kw, "expected a statement (species, param, volume, convention, init, reaction)");
      }
      parser.take();
      if (kw.text == "species") {
        const Token first = parser.expect_ident("a species name");
        species.emplace_back(first.text, first.pos);
        while (parser.peek().kind == Tok::ident && !is_keyword(parser.peek().text)) {
          const Token t = parser.take();
          species.emplace_back(t.text, t.pos);
        }
      } else if (kw.text == "param") {
        const Token name = parser.expect_ident("a parameter name");
        parser.expect(Tok::equals, "'='");
        double sign = 1.0;
        if (parser.peek().kind == Tok::minus) {
          parser.take();
          sign = -1.0;
        }
        const Token v = parser.expect(Tok::number, "a number");
        params.emplace_back(name.text, sign * v.value, name.pos);
      } else if (kw.text == "volume") {
        const Token v = parser.expect(Tok::number, "a number");
        if (volume) diags.push_back({kw.pos, "volume declared twice", "volume"});
        volume = {v.value, kw.pos};
      } else if (kw.text == "convention") {
        const Token v = parser.expect_ident("'power' or 'factorial'");
        if (v.text != "power" && v.text != "factorial") parser.fail(v, "expected 'power' or 'factorial'");
        if (convention) diags.push_back({kw.pos, "convention declared twice", "convention"});
        convention = {v.text == "power" ? Convention::power : Convention::factorial, kw.pos};
      } else if (kw.text == "init") {
        for (;;) {
          const Token name = parser.expect_ident("a species name");
          parser.expect(Tok::equals, "'='");
          const Token v = parser.expect(Tok::number, "an integer");
          if (!v.integer) parser.fail(v, "initial counts must be integers");
          inits.emplace_back(name.text, static_cast<long long>(v.value), name.pos);
          if (parser.peek().kind != Tok::comma) break;
          parser.take();
        }
      } else {  // reaction
        RawReaction r;
        r.pos = kw.pos;
        if (parser.peek().kind == Tok::ident && parser.peek(1).kind == Tok::colon &&
            !is_keyword(parser.peek().text)) {
          r.name = parser.take().text;
          parser.take();
        }
        r.lhs = parser.side();
        parser.expect(Tok::arrow, "'->'");
        r.rhs = parser.side();
        parser.expect(Tok::at, "'@'");
        r.rate = parser.expr();
        reactions.push_back(std::move(r));
      }
    }
  } catch (const SyntaxError& e) {
    throw ParseError({from_syntax(e)});
  }

  // Semantic pass.
  Symbols sym;
  std::map<std::string, SourcePos> seen;
  ModelDocument doc;
  for (const auto& [name, pos] : species) {
    if (!seen.emplace(name, pos).second) {
      diags.push_back({pos, "duplicate declaration of '" + name + "'", name});
      continue;
    }
    sym.species.push_back(name);
    doc.species_pos.push_back(pos);
  }
  std::vector<Parameter> parameters;
  for (const auto& [name, value, pos] : params) {
    if (!seen.emplace(name, pos).second) {
      diags.push_back({pos, "duplicate declaration of '" + name + "'", name});
      continue;
    }
    if (!(value > 0.0) || !std::isfinite(value)) {
      diags.push_back({pos, "parameter '" + name + "' must be positive", name});
    }
    sym.parameters.push_back(name);
    parameters.push_back({name, value});
    doc.parameter_pos.push_back(pos);
  }
  if (volume && !(volume->first > 0.0)) {
    diags.push_back({volume->second, "volume must be positive", "volume"});
  }

  const std::size_t n = sym.species.size();
  std::vector<Reaction> built;
  std::map<std::string, SourcePos> reaction_names;
  for (const auto& raw : reactions) {
    if (!raw.name.empty() && !reaction_names.emplace(raw.name, raw.pos).second) {
      diags.push_back({raw.pos, "duplicate reaction name '" + raw.name + "'", raw.name});
    }
    std::vector<int> b(n, 0), c(n, 0);
    bool ok = true;
    auto fill = [&](const std::vector<RawTerm>& terms, std::vector<int>& v) {
      for (const auto& t : terms) {
        auto idx = sym.species_index(t.species);
        if (!idx) {
          diags.push_back({t.pos, "unknown species '" + t.species + "'", t.species});
          ok = false;
          continue;
        }
        v[*idx] += t.coefficient;
      }
    };
    fill(raw.lhs, b);
    fill(raw.rhs, c);
    const std::size_t before = diags.size();
    RateExpression rate = resolve(*raw.rate, sym, diags, true);
    if (!ok || diags.size() != before) continue;
    if (raw.lhs.empty() && raw.rhs.empty()) {
      diags.push_back({raw.pos, "reaction with both sides empty", raw.name});
      continue;
    }
    built.push_back(make_reaction(raw.name, std::move(b), std::move(c), std::move(rate)));
    doc.reaction_pos.push_back(raw.pos);
  }

  doc.initial_state.assign(n, 0);
  std::vector<bool> init_seen(n, false);
  for (const auto& [name, value, pos] : inits) {
    auto idx = sym.species_index(name);
    if (!idx) {
      diags.push_back({pos, "unknown species '" + name + "' in init", name});
      continue;
    }
    if (init_seen[*idx]) diags.push_back({pos, "initial count for '" + name + "' given twice", name});
    if (value < 0) diags.push_back({pos, "initial counts must be nonnegative", name});
    init_seen[*idx] = true;
    doc.initial_state[*idx] = value;
  }

  if (!diags.empty()) throw ParseError(std::move(diags));

  doc.network = ReactionNetwork(sym.species, std::move(parameters), std::move(built),
                                volume ? volume->first : 1.0,
                                convention ? convention->first : Convention::power);
  const ValidationReport rep = validate_network(doc.network);
  if (!rep.ok()) {
    for (const auto& e : rep.errors) diags.push_back({{1, 1}, e, ""});
    throw ParseError(std::move(diags));
  }
  return doc;
}

namespace {

std::string side_text(const ReactionNetwork& net, const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0) continue;
    if (!s.empty()) s += " + ";
    if (v[i] > 1) s += std::to_string(v[i]) + " ";
    s += net.species()[i].name;
  }
  return s.empty() ? "0" : s;
}

}  // namespace

std::string serialize_model(const ModelDocument& doc, ModelFormat format) {
  const auto& net = doc.network;
  if (format == ModelFormat::json) {
    nlohmann::ordered_json j;
    j["species"] = nlohmann::ordered_json::array();
    for (const auto& s : net.species()) j["species"].push_back(s.name);
    j["parameters"] = nlohmann::ordered_json::object();
    for (const auto& p : net.parameters()) j["parameters"][p.name] = p.value;
    j["reactions"] = nlohmann::ordered_json::array();
    for (const auto& r : net.reactions()) {
      nlohmann::ordered_json jr;
      jr["name"] = r.name;
      jr["reactants"] = nlohmann::ordered_json::object();
      jr["products"] = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < r.reactants.size(); ++i) {
        if (r.reactants[i]) jr["reactants"][net.species()[i].name] = r.reactants[i];
        if (r.products[i]) jr["products"][net.species()[i].name] = r.products[i];
      }
      jr["rate"] = r.rate.to_string();
      j["reactions"].push_back(std::move(jr));
    }
    j["init"] = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < net.species_count(); ++i) {
      j["init"][net.species()[i].name] = doc.initial_state.at(i);
    }
    j["volume"] = net.volume();
    j["convention"] = net.convention() == Convention::power ? "power" : "factorial";
    return j.dump(2) + "\n";
  }

  std::ostringstream os;
  if (net.species_count() > 0) {
    os << "species";
    for (const auto& s : net.species()) os << ' ' << s.name;
    os << '\n';
  }
  for (const auto& p : net.parameters()) os << "param " << p.name << " = " << format_number(p.value) << '\n';
  if (net.volume() != 1.0) os << "volume " << format_number(net.volume()) << '\n';
  if (net.convention() == Convention::factorial) os << "convention factorial\n";
  for (const auto& r : net.reactions()) {
    os << "reaction ";
    if (!r.name.empty()) os << r.name << ": ";
    os << side_text(net, r.reactants) << " -> " << side_text(net, r.products) << " @ "
       << r.rate.to_string() << '\n';
  }
  if (net.species_count() > 0) {
    os << "init ";
    for (std::size_t i = 0; i < net.species_count(); ++i) {
      os << (i ? ", " : "") << net.species()[i].name << " = " << doc.initial_state.at(i);
    }
    os << '\n';
  }
  return os.str();
}

ModelDocument parse_model_json(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError({{{1, 1}, std::string("invalid JSON: ") + e.what(), ""}});
  }
  // Rebuild DSL statements and reuse the text parser so both paths share
  // one set of semantic checks.
  try {
    std::ostringstream os;
    const auto& sp = j.at("species");
    if (!sp.empty()) {
      os << "species";
      for (const auto& s : sp) os << ' ' << s.get<std::string>();
      os << '\n';
    }
    for (const auto& [name, value] : j.at("parameters").items()) {
      os << "param " << name << " = " << format_number(value.get<double>()) << '\n';
    }
    if (j.contains("volume")) os << "volume " << format_number(j["volume"].get<double>()) << '\n';
    if (j.contains("convention")) os << "convention " << j["convention"].get<std::string>() << '\n';
    for (const auto& r : j.at("reactions")) {
      auto side = [](const nlohmann::ordered_json& m) {
        std::string s;
        for (const auto& [name, coef] : m.items()) {
          if (!s.empty()) s += " + ";
          s += std::to_string(coef.get<int>()) + " " + name;
        }
        return s.empty() ? std::string("0") : s;
      };
      os << "reaction ";
      const std::string name = r.value("name", "");
      if (!name.empty()) os << name << ": ";
      os << side(r.at("reactants")) << " -> " << side(r.at("products")) << " @ "
         << r.at("rate").get<std::string>() << '\n';
    }
    if (j.contains("init") && !j["init"].empty()) {
      os << "init ";
      bool first = true;
      for (const auto& [name, v] : j["init"].items()) {
        os << (first ? "" : ", ") << name << " = " << v.get<long long>();
        first = false;
      }
      os << '\n';
    }
    return parse_model(os.str());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError({{{1, 1}, std::string("malformed model JSON: ") + e.what(), ""}});
  }
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_model_json(text);
  return parse_model(text);
}

}  // namespace cmekit
