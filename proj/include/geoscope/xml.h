#ifndef GEOSCOPE_XML_H_
#define GEOSCOPE_XML_H_

// Small DOM over expat. Namespace aware: every node keeps its namespace URI,
// local name and the qualified name as written in the source.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geoscope::xml {

struct Attribute {
  std::string name;  // qualified, as written
  std::string ns;
  std::string local;
  std::string value;
};

struct Node {
  std::string name;  // qualified, as written
  std::string ns;
  std::string local;
  std::vector<Attribute> attributes;
  std::vector<Node> children;
  std::string text;  // concatenated character data directly under this node
  int line = 0;

  const Node *child(std::string_view qname) const;
  std::vector<const Node *> children_named(std::string_view qname) const;
  std::optional<std::string> attr(std::string_view qname) const;
  // Attribute lookup by namespace URI and local name.
  std::optional<std::string> attr_ns(std::string_view ns, std::string_view local) const;
  bool is_leaf() const { return children.empty(); }
};

struct Document {
  std::string doctype;  // root name from <!DOCTYPE ...>, empty if absent
  Node root;
};

// Throws MalformedXml with the expat message and line.
Document parse(std::string_view text);

// True when the bytes parse as XML (used for format sniffing).
bool well_formed(std::string_view text);

std::string escape_text(std::string_view s);
std::string escape_attr(std::string_view s);

// Streaming writer with two-space indentation. Elements holding text are
// written on one line so character data is preserved exactly.
class Writer {
 public:
  using Attrs = std::vector<std::pair<std::string, std::string>>;

  Writer();
  void doctype(std::string_view root, std::string_view system_id);
  void open(std::string_view name, const Attrs &attrs = {});
  void close();
  void text_element(std::string_view name, std::string_view text, const Attrs &attrs = {});
  void empty_element(std::string_view name, const Attrs &attrs = {});
  std::string str() const;

 private:
  void indent();
  void write_attrs(const Attrs &attrs);

  std::string out_;
  std::vector<std::string> stack_;
};

}  // namespace geoscope::xml

#endif  // GEOSCOPE_XML_H_
