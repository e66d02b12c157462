#include "rtm/meta/metamodel_text.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <vector>

namespace rtm::meta {

namespace {

struct Line {
  int number;
  int indent;  // 0-based offset of the first non-space character
  std::string text;
};

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

std::vector<Line> split_lines(std::string_view text, int first_line) {
  std::vector<Line> lines;
  int number = first_line;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::size_t first = raw.find_first_not_of(" \t\r");
    if (first != std::string_view::npos) {
      std::size_t last = raw.find_last_not_of(" \t\r");
      lines.push_back({number, static_cast<int>(first),
                       std::string(raw.substr(first, last - first + 1))});
    }
    ++number;
    pos = end + 1;
  }
  return lines;
}

std::optional<Multiplicity> parse_multiplicity(std::string_view s) {
  if (s == "0..1") return Multiplicity::ZeroOrOne;
  if (s == "1") return Multiplicity::One;
  if (s == "0..*" || s == "*") return Multiplicity::Many;
  return std::nullopt;
}

}  // namespace

std::shared_ptr<Metamodel> parse_metamodel(std::string_view text, std::string name,
                                           int first_line) {
  struct Pending {
    MetaClass cls;
    int line;
    int column;
    std::vector<std::pair<int, int>> ref_positions;
  };
  std::vector<Pending> classes;
  Pending* open = nullptr;
  std::set<std::string> class_names;

  for (const Line& line : split_lines(text, first_line)) {
    const int col = line.indent + 1;
    std::string_view body = line.text;
    auto keyword_end = body.find_first_of(" \t");
    std::string_view keyword = body.substr(0, keyword_end);
    std::string_view rest =
        keyword_end == std::string_view::npos ? std::string_view{} : body.substr(keyword_end);
    const int rest_col = col + static_cast<int>(keyword.size()) + 1;

    if (keyword == "class") {
      if (open) throw MetamodelTextError(line.number, col, "missing 'end' before 'class'");
      std::string cname = strip_spaces(rest);
      if (cname.empty()) throw MetamodelTextError(line.number, rest_col, "class name expected");
      if (!class_names.insert(cname).second) {
        throw MetamodelTextError(line.number, rest_col, "DuplicateClass: " + cname);
      }
      classes.push_back({MetaClass{cname, {}, {}}, line.number, rest_col, {}});
      open = &classes.back();
    } else if (keyword == "end") {
      if (!open) throw MetamodelTextError(line.number, col, "'end' without 'class'");
      open = nullptr;
    } else if (keyword == "attr" || keyword == "ref") {
      if (!open) throw MetamodelTextError(line.number, col, std::string(keyword) + " outside class");
      std::string spec = strip_spaces(rest);
      std::string member;
      if (keyword == "attr") {
        auto colon = spec.find(':');
        if (colon == std::string::npos) {
          throw MetamodelTextError(line.number, rest_col, "expected name:Type");
        }
        member = spec.substr(0, colon);
        std::string type_part = spec.substr(colon + 1);
        bool writable = true;
        if (type_part.ends_with(":readonly")) {
          writable = false;
          type_part.resize(type_part.size() - 9);
        }
        auto type = parse_type_name(type_part);
        if (!type) {
          throw MetamodelTextError(line.number, rest_col, "unknown type '" + type_part + "'");
        }
        open->cls.attributes.push_back({member, *type, writable});
      } else {
        auto arrow = spec.find("->");
        if (arrow == std::string::npos) {
          throw MetamodelTextError(line.number, rest_col, "expected name->Class[mult]");
        }
        member = spec.substr(0, arrow);
        std::string target = spec.substr(arrow + 2);
        Multiplicity mult = Multiplicity::Many;
        if (auto bracket = target.find('['); bracket != std::string::npos) {
          if (!target.ends_with("]")) {
            throw MetamodelTextError(line.number, rest_col, "unterminated multiplicity");
          }
          auto parsed = parse_multiplicity(
              std::string_view(target).substr(bracket + 1, target.size() - bracket - 2));
          if (!parsed) throw MetamodelTextError(line.number, rest_col, "bad multiplicity");
          mult = *parsed;
          target.resize(bracket);
        }
        open->cls.references.push_back({member, target, mult});
        open->ref_positions.emplace_back(line.number, rest_col);
      }
      const auto& attrs = open->cls.attributes;
      const auto& refs = open->cls.references;
      auto count = std::count_if(attrs.begin(), attrs.end(),
                                 [&](const auto& a) { return a.name == member; }) +
                   std::count_if(refs.begin(), refs.end(),
                                 [&](const auto& r) { return r.name == member; });
      if (count > 1) {
        throw MetamodelTextError(line.number, rest_col,
                                 "DuplicateMember: " + open->cls.name + "." + member);
      }
    } else {
      throw MetamodelTextError(line.number, col, "unexpected '" + std::string(keyword) + "'");
    }
  }
  if (open) throw MetamodelTextError(open->line, open->column, "class without 'end'");

  for (const auto& p : classes) {
    for (std::size_t i = 0; i < p.cls.references.size(); ++i) {
      if (!class_names.count(p.cls.references[i].target)) {
        throw MetamodelTextError(p.ref_positions[i].first, p.ref_positions[i].second,
                                 "UnknownTargetClass: " + p.cls.references[i].target);
      }
    }
  }

  auto metamodel = std::make_shared<Metamodel>(std::move(name));
  std::vector<MetaClass> specs;
  for (auto& p : classes) specs.push_back(std::move(p.cls));
  try {
    metamodel->define_classes(std::move(specs));
  } catch (const ModelError& e) {
    throw MetamodelTextError(first_line, 1, e.what());
  }
  return metamodel;
}

std::string serialize_metamodel(const Metamodel& metamodel) {
  std::ostringstream out;
  bool first = true;
  for (const MetaClass* cls : metamodel.classes()) {
    if (!first) out << '\n';
    first = false;
    out << "class " << cls->name << '\n';
    for (const auto& a : cls->attributes) {
      out << "  attr " << a.name << ':' << type_name(a.type) << (a.writable ? "" : ":readonly")
          << '\n';
    }
    for (const auto& r : cls->references) {
      out << "  ref " << r.name << "->" << r.target << '[' << to_string(r.multiplicity) << "]\n";
    }
    out << "end\n";
  }
  return out.str();
}

}  // namespace rtm::meta
