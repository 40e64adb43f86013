#pragma once

#include <set>
#include <string>
#include <vector>

#include "preskit/errors.hpp"
#include "preskit/formula.hpp"

namespace preskit {

/// A finite type: a nonempty list of formulas together with ordered
/// parameter variable blocks x1..xn and a result block y. The block
/// structure is part of the value; n = 0 is allowed.
struct BlockType {
    std::vector<std::vector<std::string>> parameter_blocks;
    std::vector<std::string> result_block;
    std::vector<Formula> formulas;

    int block_count() const { return static_cast<int>(parameter_blocks.size()); }
    int block_arity(int i) const { return static_cast<int>(parameter_blocks[static_cast<std::size_t>(i)].size()); }
    int result_arity() const { return static_cast<int>(result_block.size()); }

    std::set<std::string> block_vars() const {
        std::set<std::string> out;
        for (const auto& b : parameter_blocks) out.insert(b.begin(), b.end());
        out.insert(result_block.begin(), result_block.end());
        return out;
    }

    void validate(const Signature& sig) const {
        if (result_block.empty()) throw ValidationError("result block must be nonempty");
        if (formulas.empty()) throw ValidationError("type must contain at least one formula");
        std::set<std::string> vars;
        auto add = [&](const std::string& v) {
            if (!vars.insert(v).second)
                throw ValidationError("block variable '" + v + "' repeated");
            if (sig.has_function(v) || sig.has_relation(v))
                throw ValidationError("block variable '" + v + "' clashes with a signature symbol");
        };
        for (const auto& b : parameter_blocks) {
            if (b.empty()) throw ValidationError("parameter block must be nonempty");
            for (const auto& v : b) add(v);
        }
        for (const auto& v : result_block) add(v);
        for (const auto& f : formulas) {
            f.validate_against(sig);
            for (const auto& v : f.free_vars())
                if (!vars.count(v))
                    throw ValidationError("formula free variable '" + v + "' is not a block variable");
            for (const auto& v : f.bound_vars())
                if (vars.count(v))
                    throw ValidationError("bound variable '" + v + "' shadows a block variable");
        }
    }

    bool same_blocks(const BlockType& o) const {
        return parameter_blocks == o.parameter_blocks && result_block == o.result_block;
    }

    /// The type whose single formula is the conjunction of a sub-list.
    BlockType conjunction_of(const std::vector<std::size_t>& indices) const {
        std::vector<Formula> picked;
        for (auto i : indices) picked.push_back(formulas[i]);
        return BlockType{parameter_blocks, result_block, {Formula::conjoin(picked)}};
    }
};

/// An ordered list of types, each with a one-variable result block; the
/// formula families quantified over by the Henkin and Tarski-Vaught checks.
struct FormulaSuite {
    std::vector<BlockType> entries;

    void validate(const Signature& sig) const {
        for (const auto& e : entries) {
            e.validate(sig);
            if (e.result_arity() != 1)
                throw ValidationError("suite entry must have a one-variable result block");
        }
    }
};

/// Phi v Psi: all pairwise disjunctions. Solution sets unite.
inline BlockType type_disjunction(const BlockType& phi, const BlockType& psi) {
    if (!phi.same_blocks(psi)) throw ValidationError("type disjunction requires identical blocks");
    BlockType out{phi.parameter_blocks, phi.result_block, {}};
    for (const auto& f : phi.formulas)
        for (const auto& g : psi.formulas) out.formulas.push_back(Formula::disjunction(f, g));
    return out;
}

/// Phi ^ Psi: the union of the formula lists. Solution sets intersect.
inline BlockType type_conjunction(const BlockType& phi, const BlockType& psi) {
    if (!phi.same_blocks(psi)) throw ValidationError("type conjunction requires identical blocks");
    BlockType out{phi.parameter_blocks, phi.result_block, phi.formulas};
    for (const auto& g : psi.formulas) {
        bool dup = false;
        for (const auto& f : phi.formulas)
            if (f == g) {
                dup = true;
                break;
            }
        if (!dup) out.formulas.push_back(g);
    }
    return out;
}

/// S(Phi_1..Phi_m, Psi): parameter blocks of the Phi_i, result block of Psi,
/// one formula per element of Phi_1 x ... x Phi_m x Psi, each the
/// existential closure over the Phi result blocks y_i of the conjunction
/// phi_1 & ... & phi_m & psi.
inline BlockType build_superposition_type(const std::vector<BlockType>& phis, const BlockType& psi) {
    if (phis.empty()) throw ValidationError("superposition requires at least one inner type");
    const auto& blocks = phis[0].parameter_blocks;
    std::set<std::string> param_vars;
    for (const auto& b : blocks) param_vars.insert(b.begin(), b.end());

    std::vector<std::vector<std::string>> mid_blocks; // y_1 .. y_m
    std::set<std::string> mid_vars;
    for (const auto& p : phis) {
        if (p.parameter_blocks != blocks)
            throw ValidationError("superposition inner types must share parameter blocks");
        mid_blocks.push_back(p.result_block);
        for (const auto& v : p.result_block) {
            if (param_vars.count(v))
                throw ValidationError("result variable '" + v + "' collides with a parameter variable");
            if (!mid_vars.insert(v).second)
                throw ValidationError("result variable '" + v + "' shared between inner types");
        }
    }
    if (psi.parameter_blocks != mid_blocks)
        throw ValidationError("outer type parameter blocks must be the inner result blocks");
    for (const auto& v : psi.result_block)
        if (param_vars.count(v) || mid_vars.count(v))
            throw ValidationError("outer result variable '" + v + "' collides with an inner variable");

    BlockType out{blocks, psi.result_block, {}};
    // Odometer over Phi_1 x ... x Phi_m x Psi, outer type slowest.
    std::vector<std::size_t> idx(phis.size() + 1, 0);
    while (true) {
        std::vector<Formula> conj;
        for (std::size_t i = 0; i < phis.size(); ++i) conj.push_back(phis[i].formulas[idx[i]]);
        conj.push_back(psi.formulas[idx[phis.size()]]);
        Formula body = Formula::conjoin(conj);
        for (int i = static_cast<int>(mid_blocks.size()) - 1; i >= 0; --i) {
            const auto& blk = mid_blocks[static_cast<std::size_t>(i)];
            for (int j = static_cast<int>(blk.size()) - 1; j >= 0; --j)
                body = Formula::exists(blk[static_cast<std::size_t>(j)], std::move(body));
        }
        out.formulas.push_back(std::move(body));
        int k = static_cast<int>(idx.size()) - 1;
        while (k >= 0) {
            std::size_t limit = (k == static_cast<int>(phis.size()))
                                    ? psi.formulas.size()
                                    : phis[static_cast<std::size_t>(k)].formulas.size();
            if (++idx[static_cast<std::size_t>(k)] < limit) break;
            idx[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return out;
}

} // namespace preskit
