#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace deeprat::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Verbosity from DEEPRAT_LOG (error|warn|info|debug), default info.
inline Level threshold() {
    static const Level level = [] {
        const char* v = std::getenv("DEEPRAT_LOG");
        if (!v) return Level::Info;
        if (!std::strcmp(v, "error")) return Level::Error;
        if (!std::strcmp(v, "warn")) return Level::Warn;
        if (!std::strcmp(v, "debug")) return Level::Debug;
        return Level::Info;
    }();
    return level;
}

inline void emit(Level level, const std::string& msg) {
    if (level > threshold()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[deeprat:%s] %s\n", names[int(level)], msg.c_str());
}

inline void error(const std::string& msg) { emit(Level::Error, msg); }
inline void warn(const std::string& msg) { emit(Level::Warn, msg); }
inline void info(const std::string& msg) { emit(Level::Info, msg); }
inline void debug(const std::string& msg) { emit(Level::Debug, msg); }

}  // namespace deeprat::log
