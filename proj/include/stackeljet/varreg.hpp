#pragma once

#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace stackeljet {

using VarId = std::uint32_t;

// Global append-only variable registry. Ids are handed out on first use;
// the *canonical order* of variables (used by the monomial order and all
// serialization) does not depend on registration order: it is
//   w_1 < w_2 < ... < p_1 < p_2 < ... < named constants (by index, then name).
// Two registered variables therefore never change their relative order when
// a third one appears.
class VarRegistry {
public:
    struct Info {
        std::string name;
        int group = 3;   // 0 = w_i, 1 = p_i, 2 = indexed constant, 3 = other
        long index = 0;  // i for w_i/p_i, numeric suffix for constants
    };

    static VarRegistry& instance() {
        static VarRegistry reg;
        return reg;
    }

    VarId id(const std::string& name) {
        {
            std::shared_lock lk(mu_);
            auto it = by_name_.find(name);
            if (it != by_name_.end()) return it->second;
        }
        std::unique_lock lk(mu_);
        auto it = by_name_.find(name);
        if (it != by_name_.end()) return it->second;
        VarId v = static_cast<VarId>(infos_.size());
        infos_.push_back(classify(name));
        by_name_.emplace(name, v);
        return v;
    }

    Info info(VarId v) const {
        std::shared_lock lk(mu_);
        if (v >= infos_.size()) throw std::out_of_range("VarRegistry: bad id");
        return infos_[v];
    }

    std::string name(VarId v) const { return info(v).name; }

    // Canonical strict order.  Stable for any pair once both exist.
    bool before(VarId a, VarId b) const {
        if (a == b) return false;
        std::shared_lock lk(mu_);
        const Info& ia = infos_[a];
        const Info& ib = infos_[b];
        if (ia.group != ib.group) return ia.group < ib.group;
        if (ia.index != ib.index) return ia.index < ib.index;
        return ia.name < ib.name;
    }

private:
    static Info classify(const std::string& name) {
        Info out;
        out.name = name;
        auto num_suffix = [](const std::string& s, size_t from, long& val) {
            if (from >= s.size()) return false;
            for (size_t i = from; i < s.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
            val = std::stol(s.substr(from));
            return true;
        };
        long idx = 0;
        if (name.size() > 1 && name[0] == 'w' && num_suffix(name, 1, idx)) {
            out.group = 0;
            out.index = idx;
        } else if (name.size() > 1 && name[0] == 'p' && num_suffix(name, 1, idx)) {
            out.group = 1;
            out.index = idx;
        } else if (name.size() > 1 && (name[0] == 'c' || name[0] == 'd') && num_suffix(name, 1, idx)) {
            out.group = 2;
            // all c_j before all d_i at equal index: fold the letter into index
            out.index = idx * 2 + (name[0] == 'd');
        } else {
            out.group = 3;
        }
        return out;
    }

    mutable std::shared_mutex mu_;
    std::vector<Info> infos_;
    std::unordered_map<std::string, VarId> by_name_;
};

inline VarId var(const std::string& name) { return VarRegistry::instance().id(name); }
inline VarId wvar(int i) { return var("w" + std::to_string(i)); }
inline VarId pvar(int i) { return var("p" + std::to_string(i)); }
inline VarId cvar(int j) { return var("c" + std::to_string(j)); }
inline VarId dvar(int i) { return var("d" + std::to_string(i)); }
inline std::string var_name(VarId v) { return VarRegistry::instance().name(v); }
inline bool var_before(VarId a, VarId b) { return VarRegistry::instance().before(a, b); }

} // namespace stackeljet
