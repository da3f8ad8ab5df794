//! Panel-solver coupling: a scripted XFOIL subprocess and a cheap
//! thin-airfoil surrogate with the same interface.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::AsoError;
use crate::geom::{decompose, write_selig, AirfoilSection, FEASIBILITY_TOL};

/// Environment variable that overrides the configured solver path.
pub const SOLVER_ENV: &str = "AIRGEN_XFOIL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XfoilCase {
    pub reynolds: f64,
    pub mach: f64,
    pub alpha_deg: f64,
    pub panels: usize,
    pub iterations: usize,
    pub timeout_secs: f64,
}

impl Default for XfoilCase {
    fn default() -> Self {
        Self { reynolds: 1.8e6, mach: 0.01, alpha_deg: 0.0, panels: 160, iterations: 200, timeout_secs: 20.0 }
    }
}

impl XfoilCase {
    pub fn validate(&self) -> Result<(), AsoError> {
        if !(self.reynolds > 0.0) || !(self.mach >= 0.0) || !self.alpha_deg.is_finite() {
            return Err(AsoError::InvalidConfig("flow conditions need Re > 0, M >= 0 and finite alpha".into()));
        }
        if self.panels < 20 || self.iterations == 0 || !(self.timeout_secs > 0.0) {
            return Err(AsoError::InvalidConfig("panels >= 20, iterations > 0 and timeout > 0 required".into()));
        }
        Ok(())
    }
}

/// Aerodynamic coefficients; all absent when the solver did not converge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XfoilResult {
    pub cl: Option<f64>,
    pub cd: Option<f64>,
    pub cm: Option<f64>,
    pub converged: bool,
}

impl XfoilResult {
    pub fn not_converged() -> Self {
        Self { cl: None, cd: None, cm: None, converged: false }
    }

    pub fn converged(cl: f64, cd: f64, cm: f64) -> Self {
        Self { cl: Some(cl), cd: Some(cd), cm: Some(cm), converged: true }
    }

    pub fn lift_to_drag(&self) -> Option<f64> {
        match (self.cl, self.cd) {
            (Some(cl), Some(cd)) if cd > 0.0 => Some(cl / cd),
            _ => None,
        }
    }
}

pub trait AeroEvaluator: Send + Sync {
    fn name(&self) -> String;

    fn evaluate(&self, section: &AirfoilSection) -> Result<XfoilResult, AsoError>;
}

#[derive(Debug, Clone)]
pub struct Xfoil {
    pub binary: PathBuf,
    pub case: XfoilCase,
}

impl Xfoil {
    /// Resolve the solver binary: the environment override wins over the
    /// configured path; bare names are looked up on `PATH`.
    pub fn locate(configured: Option<&Path>, case: XfoilCase) -> Result<Self, AsoError> {
        case.validate()?;
        let wanted = std::env::var_os(SOLVER_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| configured.map(Path::to_path_buf))
            .ok_or_else(|| AsoError::SolverNotFound(format!("set xfoil.path or {SOLVER_ENV}")))?;
        let binary = resolve_binary(&wanted).ok_or_else(|| AsoError::SolverNotFound(wanted.display().to_string()))?;
        Ok(Self { binary, case })
    }

    fn script(&self) -> String {
        let c = &self.case;
        format!(
            "PLOP\nG F\n\nLOAD foil.dat\nPPAR\nN {}\n\n\nOPER\nVISC {}\nMACH {}\nITER {}\nPACC\npolar.txt\n\nALFA {}\n\nQUIT\n",
            c.panels, c.reynolds, c.mach, c.iterations, c.alpha_deg
        )
    }
}

fn resolve_binary(path: &Path) -> Option<PathBuf> {
    if path.components().count() > 1 {
        return path.is_file().then(|| path.to_path_buf());
    }
    let dirs = std::env::var_os("PATH")?;
    std::env::split_paths(&dirs).map(|d| d.join(path)).find(|p| p.is_file())
}

impl AeroEvaluator for Xfoil {
    fn name(&self) -> String {
        "xfoil".into()
    }

    fn evaluate(&self, section: &AirfoilSection) -> Result<XfoilResult, AsoError> {
        if !section.is_feasible(FEASIBILITY_TOL) {
            return Err(AsoError::InfeasibleInput(format!("min thickness {:.3e}", section.min_thickness())));
        }
        let dir = tempfile::tempdir()?;
        std::fs::write(dir.path().join("foil.dat"), write_selig("airfoil", &section.selig_points()))?;
        let mut child = Command::new(&self.binary)
            .current_dir(dir.path())
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                    AsoError::SolverNotFound(format!("{}: {e}", self.binary.display()))
                }
                _ => AsoError::Io(e),
            })?;
        if let Some(mut stdin) = child.stdin.take() {
            // A solver that exits early closes the pipe; the polar check
            // below reports that as non-convergence.
            let _ = stdin.write_all(self.script().as_bytes());
        }
        let timeout = Duration::from_secs_f64(self.case.timeout_secs);
        let start = Instant::now();
        loop {
            if child.try_wait()?.is_some() {
                break;
            }
            if start.elapsed() >= timeout {
                let _ = child.kill();
                child.wait()?;
                return Err(AsoError::Timeout(timeout));
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        match std::fs::read_to_string(dir.path().join("polar.txt")) {
            Ok(text) => Ok(parse_polar(&text, self.case.alpha_deg)),
            Err(_) => Ok(XfoilResult::not_converged()),
        }
    }
}

/// Read the polar accumulation file: the data rows follow a dashed
/// separator with columns `alpha CL CD CDp CM ...`.
pub fn parse_polar(text: &str, alpha_deg: f64) -> XfoilResult {
    let mut rows = text.lines().skip_while(|l| !l.trim_start().starts_with("---")).skip(1);
    rows.find_map(|line| {
        let cols: Vec<f64> = line.split_whitespace().map_while(|t| t.parse().ok()).collect();
        (cols.len() >= 5 && (cols[0] - alpha_deg).abs() < 1e-3 && cols[2] > 0.0)
            .then(|| XfoilResult::converged(cols[1], cols[2], cols[4]))
    })
    .unwrap_or_else(XfoilResult::not_converged)
}

/// Thin-airfoil lift and moment with a flat-plate turbulent skin-friction
/// drag and a thickness form factor. Used when no solver is installed.
#[derive(Debug, Clone, Default)]
pub struct ThinAirfoilSurrogate {
    pub case: XfoilCase,
}

impl ThinAirfoilSurrogate {
    pub fn new(case: XfoilCase) -> Self {
        Self { case }
    }
}

impl AeroEvaluator for ThinAirfoilSurrogate {
    fn name(&self) -> String {
        "thin-airfoil surrogate".into()
    }

    fn evaluate(&self, section: &AirfoilSection) -> Result<XfoilResult, AsoError> {
        if !section.is_feasible(FEASIBILITY_TOL) {
            return Err(AsoError::InfeasibleInput(format!("min thickness {:.3e}", section.min_thickness())));
        }
        let tc = decompose(section);
        // Piecewise-constant camber slope between grid points, integrated
        // exactly in the angular coordinate x = (1 - cos θ) / 2.
        let (mut i0, mut a1, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..tc.x.len() - 1 {
            let dx = tc.x[i + 1] - tc.x[i];
            if dx <= 0.0 {
                continue;
            }
            let s = (tc.c[i + 1] - tc.c[i]) / dx;
            let th = |x: f64| (1.0 - 2.0 * x).clamp(-1.0, 1.0).acos();
            let (ta, tb) = (th(tc.x[i]), th(tc.x[i + 1]));
            i0 += s * ((tb - tb.sin()) - (ta - ta.sin()));
            a1 += s * (tb.sin() - ta.sin());
            a2 += s * ((2.0 * tb).sin() - (2.0 * ta).sin()) / 2.0;
        }
        let pi = std::f64::consts::PI;
        let alpha_l0 = i0 / pi;
        let (a1, a2) = (2.0 / pi * a1, 2.0 / pi * a2);
        let alpha = self.case.alpha_deg.to_radians();
        let cl = 2.0 * pi * (alpha - alpha_l0);
        let cm = pi / 4.0 * (a2 - a1);
        let t = tc.t.iter().copied().fold(0.0, f64::max);
        let cf = 0.074 / self.case.reynolds.powf(0.2);
        let cd = 2.0 * cf * (1.0 + 2.0 * t + 60.0 * t.powi(4));
        Ok(XfoilResult::converged(cl, cd, cm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::cosine_grid;
    use crate::geom::naca::naca4_section;

    fn naca4(m: f64, p: f64, t: f64) -> AirfoilSection {
        naca4_section(m, p, t, &cosine_grid())
    }

    #[test]
    fn polar_rows_are_parsed() {
        let text = "\n XFOIL Version 6.99\n\n  alpha    CL        CD       CDp       CM     Top_Xtr  Bot_Xtr\n \
                    ------ -------- --------- --------- -------- -------- --------\n   \
                    0.000   0.2412   0.00612   0.00155  -0.0531   0.6000   0.7000\n";
        let r = parse_polar(text, 0.0);
        assert!(r.converged);
        assert_eq!(r.cl, Some(0.2412));
        assert_eq!(r.cd, Some(0.00612));
        assert_eq!(r.cm, Some(-0.0531));
        assert!((r.lift_to_drag().unwrap() - 0.2412 / 0.00612).abs() < 1e-12);
    }

    #[test]
    fn empty_polar_means_not_converged() {
        let text = "  alpha    CL        CD\n ------ -------- ---------\n";
        let r = parse_polar(text, 0.0);
        assert!(!r.converged);
        assert!(r.cl.is_none() && r.cd.is_none() && r.cm.is_none());
    }

    #[test]
    fn surrogate_matches_thin_airfoil_theory() {
        let s = ThinAirfoilSurrogate::default();
        let sym = s.evaluate(&naca4(0.0, 0.4, 0.12)).unwrap();
        assert!(sym.cl.unwrap().abs() < 1e-10);
        assert!(sym.cm.unwrap().abs() < 1e-10);
        // NACA 2412: zero-lift angle about -2.08 degrees.
        let cambered = s.evaluate(&naca4(0.02, 0.4, 0.12)).unwrap();
        let alpha_l0 = -cambered.cl.unwrap() / (2.0 * std::f64::consts::PI);
        assert!((alpha_l0.to_degrees() + 2.08).abs() < 0.05, "{}", alpha_l0.to_degrees());
        assert!(cambered.cm.unwrap() < 0.0);
        let cd = sym.cd.unwrap();
        assert!(cd > 0.004 && cd < 0.012, "{cd}");
    }

    #[test]
    fn surrogate_rejects_crossing_sections() {
        let mut s = naca4(0.0, 0.4, 0.12);
        s.y_upper[30] = s.y_lower[30] - 0.01;
        assert!(matches!(ThinAirfoilSurrogate::default().evaluate(&s), Err(AsoError::InfeasibleInput(_))));
    }

    #[test]
    fn missing_binary_is_reported() {
        let err = Xfoil::locate(Some(Path::new("/nonexistent/dir/xfoil")), XfoilCase::default());
        if std::env::var_os(SOLVER_ENV).is_none() {
            assert!(matches!(err, Err(AsoError::SolverNotFound(_))));
        }
    }

    #[cfg(unix)]
    fn fake_solver(body: &str) -> (tempfile::TempDir, PathBuf) {
        use std::os::unix::fs::PermissionsExt;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fake-xfoil");
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        (dir, path)
    }

    #[cfg(unix)]
    #[test]
    fn scripted_session_against_fake_solver() {
        // Echoes the requested Reynolds number back as CL so the test can
        // confirm the script reached the solver.
        let (_dir, path) = fake_solver(
            r#"test -s foil.dat || exit 1
re=$(sed -n 's/^VISC //p')
printf '  alpha    CL        CD       CDp       CM\n ------ -------- --------- --------- --------\n   0.000   %s   0.00540   0.00100  -0.0010\n' "$re" > polar.txt"#,
        );
        let xf = Xfoil { binary: path, case: XfoilCase { reynolds: 12345.0, ..XfoilCase::default() } };
        let r = xf.evaluate(&naca4(0.0, 0.4, 0.12)).unwrap();
        assert!(r.converged);
        assert_eq!(r.cl, Some(12345.0));
        assert_eq!(r.cd, Some(0.0054));
    }

    #[cfg(unix)]
    #[test]
    fn hung_solver_is_killed() {
        let (_dir, path) = fake_solver("exec sleep 30");
        let xf = Xfoil { binary: path, case: XfoilCase { timeout_secs: 0.3, ..XfoilCase::default() } };
        let start = Instant::now();
        assert!(matches!(xf.evaluate(&naca4(0.0, 0.4, 0.12)), Err(AsoError::Timeout(_))));
        assert!(start.elapsed() < Duration::from_secs(5));
    }

    #[cfg(unix)]
    #[test]
    fn silent_solver_is_not_converged() {
        let (_dir, path) = fake_solver("cat > /dev/null");
        let xf = Xfoil { binary: path, case: XfoilCase::default() };
        assert!(!xf.evaluate(&naca4(0.0, 0.4, 0.12)).unwrap().converged);
    }

    #[test]
    fn crossing_sections_never_reach_the_solver() {
        let xf = Xfoil { binary: PathBuf::from("/nonexistent"), case: XfoilCase::default() };
        let mut s = naca4(0.0, 0.4, 0.12);
        s.y_upper[30] = s.y_lower[30] - 0.01;
        assert!(matches!(xf.evaluate(&s), Err(AsoError::InfeasibleInput(_))));
    }
}
