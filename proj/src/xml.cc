#include "geoscope/xml.h"

#include <expat.h>

#include <memory>

#include "geoscope/error.h"

namespace geoscope::xml {

namespace {

constexpr char kNsSep = '\x1F';

// Splits an expat triplet "uri<sep>local<sep>prefix".
void split_triplet(const char *raw, std::string &name, std::string &ns, std::string &local) {
  std::string s(raw);
  auto first = s.find(kNsSep);
  if (first == std::string::npos) {
    name = local = s;
    ns.clear();
    return;
  }
  ns = s.substr(0, first);
  auto second = s.find(kNsSep, first + 1);
  if (second == std::string::npos) {
    local = s.substr(first + 1);
    name = local;
  } else {
    local = s.substr(first + 1, second - first - 1);
    name = s.substr(second + 1) + ":" + local;
  }
}

struct Builder {
  Document doc;
  std::vector<Node *> stack;
  XML_Parser parser = nullptr;

  static void start(void *data, const char *el, const char **attrs) {
    auto *self = static_cast<Builder *>(data);
    Node node;
    split_triplet(el, node.name, node.ns, node.local);
    node.line = static_cast<int>(XML_GetCurrentLineNumber(self->parser));
    for (int i = 0; attrs[i]; i += 2) {
      Attribute a;
      split_triplet(attrs[i], a.name, a.ns, a.local);
      a.value = attrs[i + 1];
      node.attributes.push_back(std::move(a));
    }
    if (self->stack.empty()) {
      self->doc.root = std::move(node);
      self->stack.push_back(&self->doc.root);
    } else {
      Node *parent = self->stack.back();
      parent->children.push_back(std::move(node));
      self->stack.push_back(&parent->children.back());
    }
  }

  static void end(void *data, const char *) {
    static_cast<Builder *>(data)->stack.pop_back();
  }

  static void chars(void *data, const char *s, int len) {
    auto *self = static_cast<Builder *>(data);
    if (!self->stack.empty()) self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }

  static void doctype(void *data, const char *name, const char *, const char *, int) {
    static_cast<Builder *>(data)->doc.doctype = name;
  }
};

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

const Node *Node::child(std::string_view qname) const {
  for (const auto &c : children) {
    if (c.name == qname) return &c;
  }
  return nullptr;
}

std::vector<const Node *> Node::children_named(std::string_view qname) const {
  std::vector<const Node *> out;
  for (const auto &c : children) {
    if (c.name == qname) out.push_back(&c);
  }
  return out;
}

std::optional<std::string> Node::attr(std::string_view qname) const {
  for (const auto &a : attributes) {
    if (a.name == qname) return a.value;
  }
  return std::nullopt;
}

std::optional<std::string> Node::attr_ns(std::string_view ns, std::string_view local) const {
  for (const auto &a : attributes) {
    if (a.ns == ns && a.local == local) return a.value;
  }
  return std::nullopt;
}

Document parse(std::string_view text) {
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreateNS("UTF-8", kNsSep));
  XML_SetReturnNSTriplet(parser.get(), 1);
  Builder builder;
  builder.parser = parser.get();
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &Builder::start, &Builder::end);
  XML_SetCharacterDataHandler(parser.get(), &Builder::chars);
  XML_SetStartDoctypeDeclHandler(parser.get(), &Builder::doctype);
  if (XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    throw MalformedXml(std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) + " at line " +
                       std::to_string(XML_GetCurrentLineNumber(parser.get())));
  }
  // Triplet mode reports the prefix on qualified names but not on names in
  // the default namespace, which is what we want for `name`.
  return std::move(builder.doc);
}

bool well_formed(std::string_view text) {
  try {
    parse(text);
    return true;
  } catch (const MalformedXml &) {
    return false;
  }
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\t': out += "&#9;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
  return out;
}

Writer::Writer() { out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"; }

void Writer::doctype(std::string_view root, std::string_view system_id) {
  out_ += "<!DOCTYPE ";
  out_ += root;
  out_ += " SYSTEM \"";
  out_ += system_id;
  out_ += "\">\n";
}

void Writer::indent() { out_.append(stack_.size() * 2, ' '); }

void Writer::write_attrs(const Attrs &attrs) {
  for (const auto &[k, v] : attrs) {
    out_ += ' ';
    out_ += k;
    out_ += "=\"";
    out_ += escape_attr(v);
    out_ += '"';
  }
}

void Writer::open(std::string_view name, const Attrs &attrs) {
  indent();
  out_ += '<';
  out_ += name;
  write_attrs(attrs);
  out_ += ">\n";
  stack_.emplace_back(name);
}

void Writer::close() {
  std::string name = std::move(stack_.back());
  stack_.pop_back();
  indent();
  out_ += "</" + name + ">\n";
}

void Writer::text_element(std::string_view name, std::string_view text, const Attrs &attrs) {
  indent();
  out_ += '<';
  out_ += name;
  write_attrs(attrs);
  out_ += '>';
  out_ += escape_text(text);
  out_ += "</";
  out_ += name;
  out_ += ">\n";
}

void Writer::empty_element(std::string_view name, const Attrs &attrs) {
  indent();
  out_ += '<';
  out_ += name;
  write_attrs(attrs);
  out_ += "/>\n";
}

std::string Writer::str() const { return out_; }

}  // namespace geoscope::xml
