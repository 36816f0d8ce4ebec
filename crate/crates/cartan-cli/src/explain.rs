//! Formula text for `cartan explain <id>`.

pub struct Entry {
    pub id: &'static str,
    pub title: &'static str,
    pub formula: &'static str,
    pub latex: &'static str,
    /// Report checks that evaluate this identity.
    pub checks: &'static [&'static str],
    pub signs: &'static str,
}

const SIGNS_CH: &str = "|y| is the degree in L; brackets are graded commutators [A, B] = AB - (-1)^{|A||B|}BA.";
const SIGNS_HOCH: &str = "|φ|' is the shifted degree; #₁, #₂ are the Koszul signs of the insertion and wrap-around terms.";
const SIGNS_CONN: &str = "|X| is the degree of the derivation; γ is Maurer-Cartan of degree 1 with norm < 1.";

pub const ENTRIES: &[Entry] = &[
    Entry {
        id: "eq-3.4",
        title: "Cartan homotopy for the Lie derivative",
        formula: "[d, I_y]+I_{δy}+z𝓛_y=0",
        latex: r"[d, I_y]+I_{\delta y}+z\mathcal{L}_y=0",
        checks: &["d-iota-relation"],
        signs: SIGNS_CH,
    },
    Entry {
        id: "eq-3.5",
        title: "I on brackets and the homotopy ρ",
        formula: "I_{[y₁,y₂]} - (-1)^{|y₁|}[𝓛_{y₁}, I_{y₂}] + [d, ρ_{y₁,y₂}] - ρ_{δy₁,y₂} - (-1)^{|y₁|}ρ_{y₁,δy₂} = 0",
        latex: r"I_{[y_1, y_2]}-(-1)^{|y_1|}[\mathcal{L}_{y_1}, I_{y_2}]+[d, \rho_{y_1, y_2}]-\rho_{\delta y_1, y_2}-(-1)^{|y_1|}\rho_{y_1, \delta y_2}=0",
        checks: &["iota-rho-relation"],
        signs: SIGNS_CH,
    },
    Entry {
        id: "eq-3.6",
        title: "ρ on triple brackets",
        formula: "ρ_{[y₁,y₂],y₃} - ρ_{y₁,[y₂,y₃]} + (-1)^{|y₁||y₂|}ρ_{y₂,[y₁,y₃]} - [𝓛_{y₁}, ρ_{y₂,y₃}] + (-1)^{|y₁||y₂|}[𝓛_{y₂}, ρ_{y₁,y₃}] = 0",
        latex: r"\rho_{[y_1, y_2], y_3}-\rho_{y_1, [y_2, y_3]}+(-1)^{|y_1||y_2|}\rho_{y_2, [y_1, y_3]}-[\mathcal{L}_{y_1}, \rho_{y_2, y_3}]+(-1)^{|y_1||y_2|}[\mathcal{L}_{y_2}, \rho_{y_1, y_3}]=0",
        checks: &["rho-bracket-relation"],
        signs: SIGNS_CH,
    },
    Entry {
        id: "prop-6.1",
        title: "Gerstenhaber bracket and the Lie module of chains",
        formula: "[·,·] satisfies graded Jacobi on shifted cochains; 𝓛_{[φ,ψ]} = [𝓛_φ, 𝓛_ψ]",
        latex: r"\mathcal{L}_{[\varphi, \psi]}=[\mathcal{L}_\varphi, \mathcal{L}_\psi]",
        checks: &["jacobi", "lie-module"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "prop-6.2",
        title: "ρ on brackets of cochains",
        formula: "ρ_{[φ₁,φ₂],ψ} - ρ_{φ₁,[φ₂,ψ]} + (-1)^{|φ₁|'|φ₂|'}ρ_{φ₂,[φ₁,ψ]} = [𝓛_{φ₁}, ρ_{φ₂,ψ}] - (-1)^{|φ₁|'|φ₂|'}[𝓛_{φ₂}, ρ_{φ₁,ψ}]",
        latex: r"\rho_{[\varphi_1, \varphi_2], \psi}-\rho_{\varphi_1,[\varphi_2, \psi]}+(-1)^{|\varphi_1|'|\varphi_2|'}\rho_{\varphi_2, [\varphi_1, \psi]}=[\mathcal{L}_{\varphi_1}, \rho_{\varphi_2, \psi}]-(-1)^{|\varphi_1|'|\varphi_2|'}[\mathcal{L}_{\varphi_2}, \rho_{\varphi_1, \psi}]",
        checks: &["rho-bracket"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "prop-6.4",
        title: "Connes operator against ρ and B¹",
        formula: "[B, ρ_{φ,ψ}] + B¹_{[φ,ψ]} - (-1)^{|φ|'}[𝓛_φ, B¹_ψ] = 0",
        latex: r"[B, \rho_{\varphi, \psi}]+B^1_{[\varphi, \psi]}-(-1)^{|\varphi|'}[\mathcal{L}_\varphi, B^1_\psi]=0",
        checks: &["b-rho"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "eq-6.1",
        title: "Connes operator squares to zero",
        formula: "[B, B] = 0",
        latex: r"[B, B]=0",
        checks: &["connes-b-squared"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "eq-6.2",
        title: "Connes operator commutes with 𝓛",
        formula: "[B, 𝓛_φ] = 0",
        latex: r"[B, \mathcal{L}_\varphi]=0",
        checks: &["connes-b-lie"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "eq-6.3",
        title: "Connes operator commutes with B¹",
        formula: "[B, B¹_φ] = 0",
        latex: r"[B, B^1_\varphi]=0",
        checks: &["connes-b-b1"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "eq-6.4",
        title: "ρ against the differentials",
        formula: "ρ_{δφ,ψ} - b¹_{[φ,ψ]} + (-1)^{|φ|'}ρ_{φ,δψ} = [b, ρ_{φ,ψ}] - (-1)^{|φ|'}[𝓛_φ, b¹_ψ],  b = 𝓛_m, b¹_φ = ρ_{m,φ}, δ = [m, ·]",
        latex: r"\rho_{\delta\varphi, \psi}-b^1_{[\varphi, \psi]}+(-1)^{|\varphi|'}\rho_{\varphi, \delta\psi}=[b, \rho_{\varphi, \psi}]-(-1)^{|\varphi|'}[\mathcal{L}_\varphi, b^1_\psi]",
        checks: &["rho-delta"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "eq-6.5",
        title: "b¹ against δ",
        formula: "b¹_{δψ} + [b, b¹_ψ] = 0",
        latex: r"b^1_{\delta \psi}+[b, b^1_\psi]=0",
        checks: &["b1-delta"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "eq-6.6",
        title: "Cartan homotopy formula on Hochschild chains",
        formula: "[B, b¹_φ] + [b, B¹_φ] + B¹_{δφ} + 𝓛_φ = 0",
        latex: r"[B, b^1_\varphi]+[b, B^1_\varphi]+B^1_{\delta\varphi}+\mathcal{L}_\varphi=0",
        checks: &["homotopy-cartan"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "thm-6.8",
        title: "Hochschild CH module",
        formula: "d = b + zB,  I_φ = b¹_φ + zB¹_φ,  𝓛_φ,  ρ_{φ,ψ} satisfy eq-3.4, eq-3.5, eq-3.6; the cone module is valid mod ε²",
        latex: r"d:=b+zB, \quad I_\varphi:=b^1_\varphi+zB^1_\varphi",
        checks: &["d-squared", "d-lie", "lie-bracket", "d-iota-relation", "iota-rho-relation", "rho-bracket-relation", "mod-eps-2"],
        signs: SIGNS_HOCH,
    },
    Entry {
        id: "prop-5.13",
        title: "GGM connection is a chain map",
        formula: "[d^γ, z∇^G_X] = 0,  via ℓ^γ_1(∇_Xγ) = 0",
        latex: r"[d^\gamma, z\nabla^\mathrm{G}_X]=0",
        checks: &["ggm-commutes-with-d", "ggm-leibniz", "lemma-gamma-closed", "lemma-module-derivative"],
        signs: SIGNS_CONN,
    },
    Entry {
        id: "prop-5.16",
        title: "Euler connection against the twisted differential",
        formula: "[z²∇^E_{d/dz}, d^γ] = (z/2)d^γ",
        latex: r"[z^2 \nabla^\mathrm{E}_\frac{d}{dz}, d^\gamma]=\frac{z}{2}d^\gamma",
        checks: &["euler-commutes-with-d", "euler-leibniz"],
        signs: SIGNS_CONN,
    },
    Entry {
        id: "eq-curv",
        title: "Curvature of the GGM connection",
        formula: "R^{∇G}(X,Y) = R^{∇̃}(X,Y) - (1/z)((-1)^{|X|+|Y|} I^γ_{R^∇(X,Y)γ} + (-1)^{|Y|}ρ^γ_{∇_Xγ,∇_Yγ} - (-1)^{|X|+|X||Y|}ρ^γ_{∇_Yγ,∇_Xγ}) + (1/z²)(-1)^{|X|+|Y|}[I^γ_{∇_Xγ}, I^γ_{∇_Yγ}]",
        latex: r"R^{\nabla^\mathrm{G}}(X, Y)=R^{\wt{\nabla}}(X,Y)-\frac{1}{z}\left((-1)^{|X|+|Y|} I^\gamma_{R^\nabla(X, Y)\gamma}+(-1)^{|Y|}\rho^\gamma_{\nabla_X\gamma, \nabla_Y\gamma}-(-1)^{|X|+|X||Y|}\rho^\gamma_{\nabla_Y\gamma, \nabla_X\gamma}\right)+\frac{1}{z^2}(-1)^{|X|+|Y|}[I^\gamma_{\nabla_X\gamma}, I^\gamma_{\nabla_Y \gamma}]",
        checks: &["ChConnection::curvature_formula against curvature_direct"],
        signs: SIGNS_CONN,
    },
    Entry {
        id: "rem-5.18",
        title: "Second-order homotopy from an ε³ extension",
        formula: "[d, 𝓛^γ_{y₁,y₂}] + 𝓛^γ_{δy₁,y₂} + (-1)^{|y₁|}𝓛^γ_{y₁,δy₂} = (-1)^{|y₁|}[I^γ_{y₁}, I^γ_{y₂}] + z(ρ^γ_{y₁,y₂} + (-1)^{|y₁||y₂|}ρ^γ_{y₂,y₁})",
        latex: r"[d, \mathcal{L}^\gamma_{y_1, y_2}]+\mathcal{L}^\gamma_{\delta y_1, y_2}+(-1)^{|y_1|}\mathcal{L}^\gamma_{y_1, \delta y_2}=(-1)^{|y_1|}[I^\gamma_{y_1}, I^\gamma_{y_2}]+z\big(\rho^\gamma_{y_1, y_2}+(-1)^{|y_1||y_2|}\rho^\gamma_{y_2, y_1}\big)",
        checks: &["mod-eps-3", "ChConnection::eps3_identity"],
        signs: SIGNS_CH,
    },
    Entry {
        id: "prop-5.21",
        title: "Morphisms intertwine GGM connections up to homotopy",
        formula: "∇^G_X∘f^γ_0 - f^γ_0∘∇^G_X = (-1)^{|X|+1} d^γ∘F^{ε,γ}_{∇^G_Xγ} - F^{ε,γ}_{∇^G_Xγ}∘d^γ",
        latex: r"\nabla^\mathrm{G}_X \circ f^\gamma_0-f^\gamma_0 \circ \nabla^\mathrm{G}_X=(-1)^{|X|+1} d^\gamma \circ F^{\epsilon,\gamma}_{\nabla^\mathrm{G}_X\gamma}-F^{\epsilon,\gamma}_{\nabla^\mathrm{G}_X \gamma}  \circ d^\gamma",
        checks: &["ggm-intertwining"],
        signs: SIGNS_CONN,
    },
    Entry {
        id: "cor-5.22",
        title: "Morphisms intertwine Euler connections up to homotopy",
        formula: "z²∇^E_{d/dz}∘f^γ_0 - f^γ_0∘z²∇^E_{d/dz} = (1/z)(d^γ∘F^{ε,γ}_{∇^E_Eγ} - ...), hence equal on cohomology",
        latex: r"\frac{1}{z}\left(d^\gamma \circ F^{\epsilon,\gamma}_{\nabla^\mathrm{E}_E\gamma} - \cdots\right)",
        checks: &["euler-intertwining", "cohomology-intertwining"],
        signs: SIGNS_CONN,
    },
];

pub fn ids() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.id).collect()
}

pub fn explain(id: &str) -> Result<String, String> {
    let e = ENTRIES.iter().find(|e| e.id == id).ok_or_else(|| format!("unknown id `{id}`; available: {}", ids().join(", ")))?;
    Ok(format!(
        "{}: {}\n\n  {}\n\nlatex: {}\nsigns: {}\nchecked by: {}\n",
        e.id,
        e.title,
        e.formula,
        e.latex,
        e.signs,
        e.checks.join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        let mut v = ids();
        v.sort();
        v.dedup();
        assert_eq!(v.len(), ENTRIES.len());
    }

    #[test]
    fn unknown_lists_ids() {
        let e = explain("nope").unwrap_err();
        assert!(e.contains("eq-3.4") && e.contains("cor-5.22"));
    }
}
