#include <cstdlib>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "ibf/app.hpp"
#include "ibf/errors.hpp"

namespace ibf::app {

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw InputError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw InputError("cannot move output into place at '" + path.string() + "': " + ec.message());
    }
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("IBF_DATA_DIR")) return env;
    return IBF_DEFAULT_DATA_DIR;
}

}  // namespace ibf::app
