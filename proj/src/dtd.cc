#include "geoscope/dtd.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "geoscope/error.h"

namespace geoscope {

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
         c == ':' || (static_cast<unsigned char>(c) >= 0x80);
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  void skip_space() {
    while (true) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (text_.substr(pos_, 4) == "<!--") {
        auto end = text_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
        continue;
      }
      return;
    }
  }

  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }

  bool consume(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!consume(token)) fail("expected '" + std::string(token) + "'");
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  // Occurrence indicators must follow their particle without whitespace.
  char occurrence() {
    if (pos_ < text_.size() && (text_[pos_] == '?' || text_[pos_] == '*' || text_[pos_] == '+')) {
      return text_[pos_++];
    }
    return '1';
  }

  std::string name() {
    skip_space();
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '#') ++pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string quoted() {
    skip_space();
    if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) fail("expected quoted value");
    char q = text_[pos_++];
    auto end = text_.find(q, pos_);
    if (end == std::string_view::npos) fail("unterminated literal");
    std::string value(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return value;
  }

  [[noreturn]] void fail(const std::string &what) const {
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<long>(std::min(pos_, text_.size())), '\n'));
    throw ResourceError("DTD line " + std::to_string(line) + ": " + what);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

Dtd::Particle parse_particle(Lexer &lex);

// Called after '(' has been consumed.
Dtd::Particle parse_group(Lexer &lex) {
  Dtd::Particle group;
  group.items.push_back(parse_particle(lex));
  char sep = 0;
  while (true) {
    char c = lex.peek();
    if (c == ')') {
      lex.expect(")");
      break;
    }
    if (c != ',' && c != '|') lex.fail("expected ',', '|' or ')'");
    if (sep && c != sep) lex.fail("mixed ',' and '|' in one group");
    sep = c;
    lex.expect(std::string(1, c));
    group.items.push_back(parse_particle(lex));
  }
  group.kind = sep == '|' ? Dtd::Particle::Kind::kChoice : Dtd::Particle::Kind::kSeq;
  group.occurrence = lex.occurrence();
  return group;
}

Dtd::Particle parse_particle(Lexer &lex) {
  if (lex.consume("(")) return parse_group(lex);
  Dtd::Particle p;
  p.name = lex.name();
  p.occurrence = lex.occurrence();
  return p;
}

// Returns every position reachable after matching `p` starting at `pos`.
std::set<std::size_t> match(const Dtd::Particle &p, const std::vector<std::string> &names,
                            std::size_t pos);

std::set<std::size_t> match_once(const Dtd::Particle &p, const std::vector<std::string> &names,
                                 std::size_t pos) {
  std::set<std::size_t> out;
  switch (p.kind) {
    case Dtd::Particle::Kind::kName:
      if (pos < names.size() && names[pos] == p.name) out.insert(pos + 1);
      break;
    case Dtd::Particle::Kind::kChoice:
      for (const auto &item : p.items) {
        auto r = match(item, names, pos);
        out.insert(r.begin(), r.end());
      }
      break;
    case Dtd::Particle::Kind::kSeq: {
      std::set<std::size_t> frontier{pos};
      for (const auto &item : p.items) {
        std::set<std::size_t> next;
        for (auto f : frontier) {
          auto r = match(item, names, f);
          next.insert(r.begin(), r.end());
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
      }
      out = std::move(frontier);
      break;
    }
  }
  return out;
}

std::set<std::size_t> match(const Dtd::Particle &p, const std::vector<std::string> &names,
                            std::size_t pos) {
  if (p.occurrence == '1') return match_once(p, names, pos);
  std::set<std::size_t> out;
  if (p.occurrence == '?' || p.occurrence == '*') out.insert(pos);
  std::set<std::size_t> frontier{pos};
  bool repeat = p.occurrence != '?';
  while (!frontier.empty()) {
    std::set<std::size_t> next;
    for (auto f : frontier) {
      for (auto r : match_once(p, names, f)) {
        // Guard against empty matches looping forever.
        if (r > f && !out.count(r)) next.insert(r);
        out.insert(r);
      }
    }
    if (!repeat) break;
    frontier = std::move(next);
  }
  return out;
}

bool has_non_space(const std::string &s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return !std::isspace(c); });
}

bool valid_nmtoken(const std::string &s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_name_char);
}

}  // namespace

Dtd Dtd::parse(std::string_view text) {
  Dtd dtd;
  Lexer lex(text);
  while (!lex.done()) {
    if (lex.consume("<!ELEMENT")) {
      std::string name = lex.name();
      ElementDecl decl;
      if (lex.consume("EMPTY")) {
        decl.content = ElementDecl::Content::kEmpty;
      } else if (lex.consume("ANY")) {
        decl.content = ElementDecl::Content::kAny;
      } else {
        lex.expect("(");
        if (lex.consume("#PCDATA")) {
          decl.content = ElementDecl::Content::kPcdata;
          while (lex.consume("|")) {
            decl.content = ElementDecl::Content::kMixed;
            decl.mixed_names.push_back(lex.name());
          }
          lex.expect(")");
          if (decl.content == ElementDecl::Content::kMixed && lex.occurrence() != '*') {
            lex.fail("mixed content must be declared with '*'");
          } else {
            lex.occurrence();
          }
        } else {
          decl.content = ElementDecl::Content::kChildren;
          decl.model = parse_group(lex);
        }
      }
      lex.expect(">");
      dtd.elements_.emplace(std::move(name), std::move(decl));
    } else if (lex.consume("<!ATTLIST")) {
      std::string element = lex.name();
      auto &list = dtd.attlists_[element];
      while (!lex.consume(">")) {
        AttributeDecl a;
        a.name = lex.name();
        if (lex.consume("(")) {
          a.type = "enum";
          do {
            a.enumerated.push_back(lex.name());
          } while (lex.consume("|"));
          lex.expect(")");
        } else {
          a.type = lex.name();
          static const std::set<std::string> kTypes = {"CDATA", "ID", "IDREF", "IDREFS", "NMTOKEN", "NMTOKENS"};
          if (!kTypes.count(a.type)) lex.fail("unsupported attribute type " + a.type);
        }
        if (lex.consume("#REQUIRED")) {
          a.default_kind = AttributeDecl::Default::kRequired;
        } else if (lex.consume("#IMPLIED")) {
          a.default_kind = AttributeDecl::Default::kImplied;
        } else if (lex.consume("#FIXED")) {
          a.default_kind = AttributeDecl::Default::kFixed;
          a.default_value = lex.quoted();
        } else {
          a.default_kind = AttributeDecl::Default::kValue;
          a.default_value = lex.quoted();
        }
        auto same = [&](const AttributeDecl &d) { return d.name == a.name; };
        if (std::none_of(list.begin(), list.end(), same)) list.push_back(std::move(a));
      }
    } else {
      lex.fail("unsupported declaration");
    }
  }
  return dtd;
}

void Dtd::merge(const Dtd &other) {
  for (const auto &[name, decl] : other.elements_) elements_.emplace(name, decl);
  for (const auto &[name, list] : other.attlists_) {
    auto &mine = attlists_[name];
    for (const auto &a : list) {
      auto same = [&](const AttributeDecl &d) { return d.name == a.name; };
      if (std::none_of(mine.begin(), mine.end(), same)) mine.push_back(a);
    }
  }
}

bool Dtd::declares(std::string_view element) const { return elements_.count(element) > 0; }

const Dtd::ElementDecl *Dtd::element(std::string_view name) const {
  auto it = elements_.find(name);
  return it == elements_.end() ? nullptr : &it->second;
}

const std::vector<Dtd::AttributeDecl> *Dtd::attributes(std::string_view element) const {
  auto it = attlists_.find(element);
  return it == attlists_.end() ? nullptr : &it->second;
}

void Dtd::validate(const xml::Node &root) const { validate_node(root); }

void Dtd::validate_node(const xml::Node &node) const {
  const ElementDecl *decl = element(node.name);
  auto violation = [&](const std::string &what) {
    throw DtdViolation("<" + node.name + "> (line " + std::to_string(node.line) + "): " + what);
  };
  if (!decl) violation("element not declared");

  // Attributes. Namespace declarations are not visible here.
  const auto *attlist = attributes(node.name);
  for (const auto &a : node.attributes) {
    const AttributeDecl *ad = nullptr;
    if (attlist) {
      for (const auto &d : *attlist) {
        if (d.name == a.name) ad = &d;
      }
    }
    if (!ad) violation("attribute '" + a.name + "' not declared");
    if (ad->type == "enum" &&
        std::find(ad->enumerated.begin(), ad->enumerated.end(), a.value) == ad->enumerated.end()) {
      violation("attribute '" + a.name + "' has value '" + a.value + "' outside its enumeration");
    }
    if ((ad->type == "NMTOKEN" || ad->type == "ID") && !valid_nmtoken(a.value)) {
      violation("attribute '" + a.name + "' is not a valid token");
    }
    if (ad->default_kind == AttributeDecl::Default::kFixed && a.value != ad->default_value) {
      violation("attribute '" + a.name + "' must equal '" + ad->default_value + "'");
    }
  }
  if (attlist) {
    for (const auto &d : *attlist) {
      if (d.default_kind == AttributeDecl::Default::kRequired && !node.attr(d.name)) {
        violation("missing required attribute '" + d.name + "'");
      }
    }
  }

  std::vector<std::string> names;
  names.reserve(node.children.size());
  for (const auto &c : node.children) names.push_back(c.name);

  switch (decl->content) {
    case ElementDecl::Content::kAny:
      return;
    case ElementDecl::Content::kEmpty:
      if (!names.empty() || !node.text.empty()) violation("declared EMPTY but has content");
      break;
    case ElementDecl::Content::kPcdata:
      if (!names.empty()) violation("only character data allowed, found <" + names.front() + ">");
      break;
    case ElementDecl::Content::kMixed:
      for (const auto &n : names) {
        if (std::find(decl->mixed_names.begin(), decl->mixed_names.end(), n) == decl->mixed_names.end()) {
          violation("<" + n + "> not allowed in mixed content");
        }
      }
      break;
    case ElementDecl::Content::kChildren: {
      if (has_non_space(node.text)) violation("character data not allowed");
      auto ends = match(decl->model, names, 0);
      if (!ends.count(names.size())) {
        std::string seq;
        for (const auto &n : names) seq += (seq.empty() ? "" : ",") + n;
        violation("children (" + seq + ") do not match the content model");
      }
      break;
    }
  }
  for (const auto &c : node.children) validate_node(c);
}

}  // namespace geoscope
