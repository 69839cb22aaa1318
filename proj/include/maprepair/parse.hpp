#pragma once

#include <string>
#include <string_view>

#include "maprepair/model.hpp"

namespace maprepair {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int col, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                             ": " + msg),
          line(line),
          col(col) {}
    int line;
    int col;
};

// Dependency text format, one statement per dependency:
//
//   P(i,n,e,c), HN(i,d) -> EthDis(e,d).
//
// Identifiers are [A-Za-z][A-Za-z0-9_]*; every identifier inside an atom is a
// variable (dependencies are constants-free). "#" starts a line comment.
// Body relations are checked against `source`. Head relations are checked
// against `target` when given, otherwise their arities are inferred and
// checked for consistency within the stream. Ids are assigned in file order,
// starting at 1.
std::vector<Tgd> parse_dependencies(std::string_view text, const Schema& source,
                                    const Schema* target = nullptr);

// Canonical form: atoms joined by ", ", arguments by ",", body and head
// separated by " -> ", one statement per line. parse(serialize(x)) == x.
std::string serialize_dependencies(const std::vector<Tgd>& tgds);

// Schema file: one "RelName/arity" per line, "#" comments.
Schema parse_schema(std::string_view text);
std::string serialize_schema(const Schema& schema);

// Ground-fact file: statements like "P(*,?n1,bob)." where "*" is the critical
// constant, "?x" a labeled null and a bare identifier an ordinary constant.
// Null names are local to the stream; ids are minted from `fresh`.
Instance parse_facts(std::string_view text, FreshSource& fresh);
std::string serialize_facts(const Instance& instance);

// Infers a schema (relation -> arity) from atoms already parsed elsewhere.
Schema schema_of_heads(const std::vector<Tgd>& tgds);

}  // namespace maprepair
