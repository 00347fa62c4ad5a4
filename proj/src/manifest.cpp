#include "attnrank/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "attnrank/errors.hpp"
#include "json.hpp"

namespace attnrank {

void save_manifest(const std::string& path, const RunManifest& manifest) {
    nlohmann::json j;
    j["command"] = manifest.command;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : manifest.config) cfg[k] = v;
    j["config"] = cfg;
    j["seed"] = manifest.seed;
    j["input_paths"] = manifest.input_paths;
    j["output_paths"] = manifest.output_paths;
    j["tool_version"] = manifest.tool_version;
    j["wall_clock_seconds"] = manifest.wall_clock_seconds;

    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("save_manifest: cannot open " + tmp);
        os << j.dump(2) << '\n';
        if (!os) throw IoError("save_manifest: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("save_manifest: cannot rename " + tmp + " to " + path);
}

}  // namespace attnrank
