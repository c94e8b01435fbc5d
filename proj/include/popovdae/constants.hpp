#pragma once

namespace popovdae::tol {

// Relative singularity threshold: A - lambda E counts as singular when its
// smallest singular value is <= eps_reg * (|A|_F + |lambda| |E|_F).
inline constexpr double eps_reg = 1e-12;

// Relative rank cutoff for pseudo-resolvent range/kernel splits.
inline constexpr double eps_rank = 1e-9;

// Spectral-abscissa margin separating "stable" from "marginal".
inline constexpr double eps_stab = 1e-9;

// Coercivity gate for the Popov operator (smallest eigenvalue must exceed it).
inline constexpr double eps_coer = 1e-8;

// Semidefiniteness slack used by the dissipativity checks.
inline constexpr double eps_psd = 1e-10;

}  // namespace popovdae::tol
