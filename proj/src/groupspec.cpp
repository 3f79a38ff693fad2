// Text and JSON forms of group specifications.

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

#include "equiset/permgroup.hpp"
#include "json.hpp"

namespace equiset {

const char* const kGroupSpecGrammar =
    "groupspec := trivial:d | cyclic:d | sym:n | trans2d:h,w | graph:k\n"
    "           | prod(A,B) | wreath(A,n)\n"
    "           | {\"degree\": l, \"generators\": [[...], ...]}";

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  GroupSpec parse() {
    GroupSpec spec = parse_spec();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return spec;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("bad groupspec '" + std::string(text_) + "' at offset " +
                      std::to_string(pos_) + ": " + why + "\n" + kGroupSpecGrammar);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  int number() {
    skip_ws();
    int value = 0;
    const auto* first = text_.data() + pos_;
    const auto* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail("expected an integer");
    pos_ += static_cast<std::size_t>(ptr - first);
    if (value <= 0) fail("sizes must be positive");
    return value;
  }

  GroupSpec parse_spec() {
    const std::string_view name = word();
    if (name == "prod") {
      expect('(');
      GroupSpec a = parse_spec();
      expect(',');
      GroupSpec b = parse_spec();
      expect(')');
      return GroupSpec::product(std::move(a), std::move(b));
    }
    if (name == "wreath") {
      expect('(');
      GroupSpec a = parse_spec();
      expect(',');
      const int n = number();
      expect(')');
      return GroupSpec::wreath(std::move(a), n);
    }
    expect(':');
    if (name == "trivial") return GroupSpec::trivial(number());
    if (name == "cyclic") return GroupSpec::cyclic(number());
    if (name == "sym") return GroupSpec::symmetric(number());
    if (name == "graph") return GroupSpec::graph(number());
    if (name == "trans2d") {
      const int h = number();
      expect(',');
      const int w = number();
      return GroupSpec::translations2d(h, w);
    }
    fail("unknown group '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

GroupSpec parse_groupspec(const std::string& text) {
  std::size_t first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && text[first] == '{') {
    return GroupSpec::explicit_generators(parse_generator_json(text));
  }
  return Parser(text).parse();
}

GeneratorSet parse_generator_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
    const int degree = doc.at("degree").get<int>();
    std::vector<Perm> gens;
    for (const auto& g : doc.at("generators")) {
      gens.emplace_back(g.get<std::vector<int>>());
    }
    return GeneratorSet(degree, std::move(gens));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad generator JSON: ") + e.what() + "\n" + kGroupSpecGrammar);
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("bad generator JSON: ") + e.what());
  }
}

std::string generator_json(const GeneratorSet& gens) {
  nlohmann::json doc;
  doc["degree"] = gens.degree();
  doc["generators"] = nlohmann::json::array();
  for (const Perm& g : gens.generators()) doc["generators"].push_back(g.images());
  return doc.dump();
}

}  // namespace equiset
