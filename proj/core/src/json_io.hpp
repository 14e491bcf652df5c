#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "pwtl/error.hpp"

namespace pwtl::detail {

using Json = nlohmann::json;

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline void write_json_file(const Json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

/// Typed member access with the document path in the error message.
template <typename T>
T member(const Json& obj, const char* key, const std::string& context) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError(context + ": missing field '" + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ParseError(context + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace pwtl::detail
