#include "fanfire/symmetry.hpp"

#include <deque>
#include <set>

#include "fanfire/json_util.hpp"

namespace fanfire {

namespace {

void check_element(const SignedPermutation& g, std::size_t m) {
  if (g.sigma.size() != m || g.eps.size() != m)
    throw Error("signed permutation has wrong size for index set of " + std::to_string(m));
  std::vector<bool> hit(m, false);
  for (int v : g.sigma) {
    if (v < 0 || static_cast<std::size_t>(v) >= m || hit[v])
      throw Error("sigma is not a permutation of 0.." + std::to_string(m - 1));
    hit[v] = true;
  }
  for (auto e : g.eps)
    if (e != 1 && e != -1) throw Error("eps entries must be +1 or -1");
}

}  // namespace

SignedPermutation sp_identity(std::size_t m) {
  SignedPermutation g;
  g.sigma.resize(m);
  for (std::size_t i = 0; i < m; ++i) g.sigma[i] = static_cast<int>(i);
  g.eps.assign(m, 1);
  return g;
}

SignedPermutation compose(const SignedPermutation& g2, const SignedPermutation& g1) {
  std::size_t m = g1.sigma.size();
  SignedPermutation g;
  g.sigma.resize(m);
  g.eps.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    g.sigma[i] = g2.sigma[g1.sigma[i]];
    g.eps[i] = static_cast<std::int8_t>(g2.eps[g1.sigma[i]] * g1.eps[i]);
  }
  return g;
}

SignedPermutation inverse(const SignedPermutation& g) {
  std::size_t m = g.sigma.size();
  SignedPermutation inv;
  inv.sigma.resize(m);
  inv.eps.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    inv.sigma[g.sigma[i]] = static_cast<int>(i);
    inv.eps[g.sigma[i]] = g.eps[i];
  }
  return inv;
}

Group close(std::vector<SignedPermutation> generators, std::size_t m, std::size_t cap) {
  for (const auto& g : generators) check_element(g, m);
  std::set<SignedPermutation> seen;
  std::deque<const SignedPermutation*> work;
  work.push_back(&*seen.insert(sp_identity(m)).first);
  while (!work.empty()) {
    const SignedPermutation* g = work.front();
    work.pop_front();
    for (const auto& h : generators) {
      auto [it, inserted] = seen.insert(compose(h, *g));
      if (!inserted) continue;
      if (seen.size() > cap)
        throw CapExceededError("group closure exceeds the cap of " + std::to_string(cap) +
                               " elements");
      work.push_back(&*it);
    }
  }
  Group G;
  G.m = m;
  G.generators = std::move(generators);
  G.elements.assign(seen.begin(), seen.end());
  return G;
}

SignVector act(const SignedPermutation& g, const SignVector& s) {
  if (g.sigma.size() != s.size())
    throw TypeError("signed permutation of size " + std::to_string(g.sigma.size()) +
                    " cannot act on a sign vector of length " + std::to_string(s.size()));
  SignVector out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    out[g.sigma[i]] = static_cast<std::int8_t>(g.eps[i] * s[i]);
  return out;
}

SignVector canonical(const Group& G, const SignVector& s) {
  // elements always contains the identity, so s itself is in the running
  SignVector best = s;
  for (const auto& g : G.elements) {
    SignVector img = act(g, s);
    if (img < best) best = std::move(img);
  }
  return best;
}

std::size_t orbit_size(const Group& G, const SignVector& s) {
  std::set<SignVector> orbit;
  for (const auto& g : G.elements) orbit.insert(act(g, s));
  return orbit.size();
}

Group group_from_json(const json& j, std::size_t cap) {
  std::uint64_t m = jsonu::need_unsigned(j, "m", "group");
  std::vector<SignedPermutation> gens;
  for (const auto& jg : jsonu::need_array(j, "generators", "group")) {
    SignedPermutation g;
    for (const auto& v : jsonu::need_array(jg, "sigma", "generator")) {
      if (!v.is_number_integer()) throw ParseError("generator: sigma entries must be integers");
      g.sigma.push_back(v.get<int>());
    }
    for (const auto& v : jsonu::need_array(jg, "eps", "generator")) {
      if (!v.is_number_integer()) throw ParseError("generator: eps entries must be integers");
      g.eps.push_back(static_cast<std::int8_t>(v.get<int>()));
    }
    gens.push_back(std::move(g));
  }
  try {
    return close(std::move(gens), static_cast<std::size_t>(m), cap);
  } catch (const CapExceededError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("group: ") + e.what());
  }
}

ojson group_to_json(const Group& G) {
  ojson j;
  j["m"] = G.m;
  j["generators"] = ojson::array();
  for (const auto& g : G.generators) {
    ojson jg;
    jg["sigma"] = g.sigma;
    jg["eps"] = ojson::array();
    for (auto e : g.eps) jg["eps"].push_back(static_cast<int>(e));
    j["generators"].push_back(std::move(jg));
  }
  return j;
}

}  // namespace fanfire
