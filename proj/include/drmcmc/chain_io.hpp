#ifndef DRMCMC_CHAIN_IO_HPP
#define DRMCMC_CHAIN_IO_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sampler.hpp"

namespace drmcmc {

inline constexpr const char* kChainSchema = "drmcmc-chain v1";

// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc())
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("parse_double: bad field '" + s + "'");
    return v;
}

// Writes content to path atomically (temp file in the same directory, then
// rename).
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// Chain CSV layout: a schema comment line, a header, then one row per state.
// Row 0 is the initial state (no iteration record); rows i >= 1 carry the
// record of iteration i. dr_stage is empty unless a DR acceptance happened.
inline std::string chain_to_csv(const Chain& chain) {
    if (chain.states.empty()) throw std::invalid_argument("chain_to_csv: empty chain");
    const std::size_t d = chain.states[0].size();
    std::ostringstream out;
    out << "# " << kChainSchema << "\n";
    out << "iteration";
    for (std::size_t i = 0; i < d; ++i) out << ",x" << i;
    out << ",accepted,dr_stage,target_evals\n";
    for (std::size_t row = 0; row < chain.states.size(); ++row) {
        out << row;
        for (double v : chain.states[row]) out << "," << format_double(v);
        if (row == 0) {
            out << ",,,\n";
            continue;
        }
        const IterationRecord& r = chain.records.at(row - 1);
        out << "," << (r.accepted ? 1 : 0) << ",";
        if (r.dr_stage) out << *r.dr_stage;
        out << "," << r.target_evals << "\n";
    }
    return out.str();
}

inline void write_chain_csv(const std::filesystem::path& path, const Chain& chain) {
    atomic_write(path, chain_to_csv(chain));
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline Chain read_chain_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != std::string("# ") + kChainSchema)
        throw std::runtime_error(path.string() + ": unrecognized chain schema line");
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
    const std::size_t n_cols = detail::split_csv(line).size();
    if (n_cols < 5) throw std::runtime_error(path.string() + ": malformed header");
    const std::size_t d = n_cols - 4;

    Chain chain;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = detail::split_csv(line);
        if (f.size() != n_cols)
            throw std::runtime_error(path.string() + ": wrong field count in row");
        Point x(d);
        for (std::size_t i = 0; i < d; ++i) x[i] = parse_double(f[1 + i]);
        chain.states.push_back(std::move(x));
        if (chain.states.size() == 1) continue;  // initial state carries no record
        IterationRecord r;
        r.accepted = f[1 + d] == "1";
        if (!f[2 + d].empty()) r.dr_stage = std::stoi(f[2 + d]);
        r.target_evals = std::stoi(f[3 + d]);
        chain.records.push_back(r);
        chain.total_target_evals += r.target_evals;
    }
    if (chain.states.empty()) throw std::runtime_error(path.string() + ": no data rows");
    return chain;
}

// FNV-1a; used to content-address configs and cache cells.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace drmcmc

#endif
