//! Browser bindings for three small experiments. Every export returns a JSON
//! string; failures come back as `{"error": "..."}`.

use fermiqit::entanglement::schmidt;
use fermiqit::jordan_wigner::{demonstrate_inconsistency, outer_pair_coherent_state};
use fermiqit::nosignal::run_protocol;
use fermiqit::random::{anti_diagonal_unitary, seeded, ssr_density, ssr_unitary};
use fermiqit::{CMatrix, CVector, FockState, ModeSet, C64};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn matrix_json(m: &CMatrix) -> Value {
    let rows: Vec<Vec<[f64; 2]>> =
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect();
    json!(rows)
}

fn finish(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// Reduces the four-mode state `(I + λC)/16` over modes 2 and 3 both ways.
pub fn partial_trace_routes(lambda: f64) -> Result<Value, String> {
    if !(-1.0..=1.0).contains(&lambda) {
        return Err("lambda must lie in [-1, 1]".into());
    }
    let rho = outer_pair_coherent_state(lambda).map_err(|e| e.to_string())?;
    let traced = ModeSet::new([2, 3]).map_err(|e| e.to_string())?;
    let r = demonstrate_inconsistency(&rho, &traced).map_err(|e| e.to_string())?;
    Ok(json!({
        "fermionic": {
            "matrix": matrix_json(&r.fermionic_first.matrix),
            "spectrum": r.fermionic_spectrum,
            "entropy": r.fermionic_entropy,
        },
        "qubit": {
            "matrix": matrix_json(&r.qubit_first.matrix),
            "spectrum": r.qubit_spectrum,
            "entropy": r.qubit_entropy,
        },
        "discrepancy": r.discrepancy(),
    }))
}

/// Runs the signalling protocol on a random 2+2 mode state with a random
/// parity-flipping `U_A`. `ub` is `"none"`, `"even"` or `"odd"`.
pub fn signalling(ub: &str, seed: u64) -> Result<Value, String> {
    let mut rng = seeded(seed);
    let a = ModeSet::new([1, 2]).map_err(|e| e.to_string())?;
    let b = ModeSet::new([3, 4]).map_err(|e| e.to_string())?;
    let rho = ssr_density(&mut rng, &a.union(&b).map_err(|e| e.to_string())?);
    let ua = anti_diagonal_unitary(&mut rng, &a).map_err(|e| e.to_string())?;
    let ub = match ub {
        "none" => None,
        "even" => Some(ssr_unitary(&mut rng, &b)),
        "odd" => Some(anti_diagonal_unitary(&mut rng, &b).map_err(|e| e.to_string())?),
        other => return Err(format!("unknown U_B choice {other:?}")),
    };
    let out = run_protocol(&rho, &a, &ua, ub.as_ref()).map_err(|e| e.to_string())?;
    let change = out.fermionic.max_deviation(&rho).map_err(|e| e.to_string())?;
    Ok(json!({
        "qubit": matrix_json(&out.qubit),
        "signal_strength": out.signal_strength(),
        "fermionic_change": change,
    }))
}

/// `cos θ |0000⟩ + sin θ (cos φ |1010⟩ + sin φ |1111⟩)` split as `{1,2} | {3,4}`.
pub fn schmidt_spectrum(theta: f64, phi: f64) -> Result<Value, String> {
    let modes = ModeSet::first(4).map_err(|e| e.to_string())?;
    let mut amps = CVector::zeros(16);
    // mode 1 is the lowest bit: 1010 has modes 1 and 3 occupied
    amps[0b0000] = C64::from(theta.cos());
    amps[0b0101] = C64::from(theta.sin() * phi.cos());
    amps[0b1111] = C64::from(theta.sin() * phi.sin());
    let psi = FockState::new(modes, amps).map_err(|e| e.to_string())?;
    let a = ModeSet::new([1, 2]).map_err(|e| e.to_string())?;
    let dec = schmidt(&psi, &a, 1e-12).map_err(|e| e.to_string())?;
    Ok(json!({
        "probabilities": dec.coeffs,
        "schmidt_number": dec.schmidt_number(1e-12),
        "entropy": dec.entropy(),
    }))
}

#[wasm_bindgen(js_name = partialTraceRoutes)]
pub fn partial_trace_routes_js(lambda: f64) -> String {
    finish(partial_trace_routes(lambda))
}

#[wasm_bindgen(js_name = signalling)]
pub fn signalling_js(ub: &str, seed: u32) -> String {
    finish(signalling(ub, seed as u64))
}

#[wasm_bindgen(js_name = schmidtSpectrum)]
pub fn schmidt_spectrum_js(theta: f64, phi: f64) -> String {
    finish(schmidt_spectrum(theta, phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routes_at_full_coherence() {
        let v = partial_trace_routes(1.0).unwrap();
        assert!((v["fermionic"]["entropy"].as_f64().unwrap() - 2.0).abs() < 1e-12);
        assert!((v["qubit"]["entropy"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(partial_trace_routes(0.0).unwrap()["discrepancy"].as_f64().unwrap() < 1e-15);
        assert!(partial_trace_routes(2.0).is_err());
    }

    #[test]
    fn signalling_cases() {
        let s = |ub| signalling(ub, 3).unwrap()["signal_strength"].as_f64().unwrap();
        assert!((s("odd") - 1.0).abs() < 1e-10);
        assert!(s("even").abs() < 1e-10);
        assert!(s("none").abs() < 1e-10);
        assert!(finish(signalling("maybe", 0)).contains("error"));
    }

    #[test]
    fn schmidt_of_parameterised_state() {
        let v = schmidt_spectrum(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4).unwrap();
        assert_eq!(v["schmidt_number"], 2);
        assert!((v["entropy"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(schmidt_spectrum(0.0, 0.0).unwrap()["schmidt_number"], 1);
    }
}
