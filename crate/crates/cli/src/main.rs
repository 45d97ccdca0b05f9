//! `pfc`: generate meshes and extent fields, evaluate contact wrenches and
//! energies between two bodies, and run scene simulations.
//!
//! Exit codes: 0 ok, 2 bad input, 3 solver failure, 4 simulation divergence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{Isometry3, Point3, Quaternion, Translation3, UnitQuaternion, Vector3};

use pfc_core::contact::{compute_contact_surface, write_surface, ContactBody};
use pfc_core::energy::{displaced_volume, EnergyReport};
use pfc_core::field::{box_field_on, laplace_field, load_field, slab_field_on, sphere_field_on, write_field};
use pfc_core::mesh::generate::{box_star, grid_box, spherical_shell, sphere_star};
use pfc_core::mesh::{load_mesh, write_mesh};
use pfc_core::sim::{load_scene, simulate_with};
use pfc_core::traction::{integrate_wrench, ContactParams, Quadrature, WrenchReport, DEFAULT_SLIP_SPEED};
use pfc_core::{BodyState, ContactError, DirichletSpec, FieldError, MeshError, SimError};

#[derive(Debug, Parser)]
#[command(name = "pfc", version, about = "Pressure field contact between rigid bodies")]
struct Cli {
    /// Triangle quadrature for traction integration (1 or 3 points).
    /// For `simulate` this overrides the scene's setting.
    #[arg(long, global = true, value_parser = parse_quadrature)]
    quadrature: Option<Quadrature>,
    /// Seed for randomized fixtures; recorded in verbose output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Progress and timing on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated tet mesh.
    Genmesh {
        #[command(subcommand)]
        shape: Shape,
    },
    /// Compute an extent field on a mesh and write it as `pfd`.
    Genfield {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Dirichlet sets (`zero ...` / `one ...` lines); required by `laplace`.
        #[arg(long)]
        bc: Option<PathBuf>,
        /// Elastic modulus E (Pa).
        #[arg(long)]
        modulus: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Contact wrench between two bodies, as JSON.
    Contact {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0.0)]
        chi: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = DEFAULT_SLIP_SPEED)]
        v_s: f64,
        /// Reference point for both torques (default: A's origin).
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        about: Option<Vector3<f64>>,
        /// Write the contact surface as OBJ, with pressures in a `.p0` sidecar.
        #[arg(long)]
        export_surface: Option<PathBuf>,
    },
    /// Contact potential energy of two bodies, as JSON.
    Energy {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Run a JSON scene and write its trajectory as CSV.
    Simulate {
        scene: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum Shape {
    /// 12-tet box centered at the origin.
    Box {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        half: Vector3<f64>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Icosphere ball centered at the origin.
    Sphere {
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Structured grid over an axis-aligned box.
    Grid {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        lo: Vector3<f64>,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        hi: Vector3<f64>,
        #[arg(long, value_parser = parse_cells)]
        cells: [usize; 3],
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Spherical shell; also writes `<output>.bc` with inner = one, outer = zero.
    Shell {
        #[arg(long)]
        inner: f64,
        #[arg(long)]
        outer: f64,
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long, default_value_t = 4)]
        layers: usize,
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    AnalyticBox,
    AnalyticSphere,
    AnalyticSlab,
    Laplace,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long)]
    a_mesh: PathBuf,
    #[arg(long)]
    a_field: PathBuf,
    #[arg(long)]
    b_mesh: PathBuf,
    #[arg(long)]
    b_field: PathBuf,
    /// `x,y,z` or `x,y,z,qw,qx,qy,qz`.
    #[arg(long, value_parser = parse_pose, allow_hyphen_values = true, default_value = "0,0,0")]
    a_pose: Isometry3<f64>,
    #[arg(long, value_parser = parse_pose, allow_hyphen_values = true, default_value = "0,0,0")]
    b_pose: Isometry3<f64>,
    /// Linear velocity of A's origin (m/s).
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "0,0,0")]
    a_velocity: Vector3<f64>,
    /// Angular velocity of A (rad/s).
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "0,0,0")]
    a_omega: Vector3<f64>,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "0,0,0")]
    b_velocity: Vector3<f64>,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "0,0,0")]
    b_omega: Vector3<f64>,
}

fn parse_numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(v)
            } else {
                Err("values must be finite".into())
            }
        })
}

fn parse_vec3(s: &str) -> Result<Vector3<f64>, String> {
    match parse_numbers(s)?.as_slice() {
        &[x, y, z] => Ok(Vector3::new(x, y, z)),
        other => Err(format!("expected x,y,z, got {} values", other.len())),
    }
}

fn parse_cells(s: &str) -> Result<[usize; 3], String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into().map_err(|v: Vec<usize>| format!("expected nx,ny,nz, got {} values", v.len()))
}

fn parse_quadrature(s: &str) -> Result<Quadrature, String> {
    let order: u8 = s.parse().map_err(|_| format!("expected 1 or 3, got `{s}`"))?;
    Quadrature::try_from(order).map_err(|e| e.to_string())
}

fn parse_pose(s: &str) -> Result<Isometry3<f64>, String> {
    let v = parse_numbers(s)?;
    let rotation = match v.len() {
        3 => UnitQuaternion::identity(),
        7 => {
            let q = Quaternion::new(v[3], v[4], v[5], v[6]);
            if q.norm() == 0.0 {
                return Err("zero quaternion".into());
            }
            UnitQuaternion::from_quaternion(q)
        }
        n => return Err(format!("expected x,y,z or x,y,z,qw,qx,qy,qz, got {n} values")),
    };
    Ok(Isometry3::from_parts(Translation3::new(v[0], v[1], v[2]), rotation))
}

/// Failure with its exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Solver(String),
    Diverged(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Diverged(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "invalid input: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Diverged(m) => write!(f, "simulation diverged: {m}"),
        }
    }
}

impl From<MeshError> for Failure {
    fn from(e: MeshError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Singular(_) | FieldError::NotConverged { .. } => Failure::Solver(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<ContactError> for Failure {
    fn from(e: ContactError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Diverged { .. } => Failure::Diverged(e.to_string()),
            SimError::Field(f) => f.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn load_body(mesh: &Path, field: &Path) -> Result<ContactBody, Failure> {
    let mesh = load_mesh(mesh)?;
    let field = load_field(field)?;
    Ok(ContactBody::new(mesh, field)?)
}

fn states(pair: &PairArgs) -> (BodyState, BodyState) {
    let a = BodyState::at_rest(pair.a_pose).with_velocity(pair.a_omega, pair.a_velocity);
    let b = BodyState::at_rest(pair.b_pose).with_velocity(pair.b_omega, pair.b_velocity);
    (a, b)
}

fn genmesh(shape: &Shape) -> Result<(), Failure> {
    let (mesh, output) = match shape {
        Shape::Box { half, output } => (box_star(*half)?, output),
        Shape::Sphere { radius, level, output } => (sphere_star(*radius, *level)?, output),
        Shape::Grid { lo, hi, cells, output } => (grid_box(Point3::from(*lo), Point3::from(*hi), *cells)?, output),
        Shape::Shell { inner, outer, level, layers, output } => {
            let (mesh, inner_set, outer_set) = spherical_shell(*inner, *outer, *level, *layers)?;
            let list = |s: &[usize]| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            let bc = format!("zero {}\none {}\n", list(&outer_set), list(&inner_set));
            let mut path = output.clone().into_os_string();
            path.push(".bc");
            std::fs::write(path, bc)?;
            (mesh, output)
        }
    };
    write_mesh(&mesh, output)?;
    print_json(&serde_json::json!({
        "vertices": mesh.vertex_count(),
        "tets": mesh.tet_count(),
        "volume": mesh.volume(),
    }))
}

fn genfield(mesh: &Path, method: Method, bc: Option<&Path>, modulus: f64, output: &Path) -> Result<(), Failure> {
    let mesh = load_mesh(mesh)?;
    let field = match method {
        Method::AnalyticBox => box_field_on(&mesh, modulus)?,
        Method::AnalyticSphere => sphere_field_on(&mesh, modulus)?,
        Method::AnalyticSlab => slab_field_on(&mesh, modulus)?,
        Method::Laplace => {
            let path = bc.ok_or_else(|| Failure::Input("the laplace method needs --bc".into()))?;
            let spec = DirichletSpec::parse(&std::fs::read_to_string(path)?)?;
            laplace_field(&mesh, &spec, modulus)?
        }
    };
    write_field(&field, output)?;
    let stats = field.stats(&mesh);
    print_json(&serde_json::json!({
        "vertices": stats.vertices,
        "min_extent": stats.min,
        "max_extent": stats.max,
        "max_boundary_extent": stats.max_boundary_extent,
        "boundary_is_zero": stats.boundary_is_zero(),
    }))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Genmesh { shape } => genmesh(shape),
        Command::Genfield { mesh, method, bc, modulus, output } => {
            genfield(mesh, *method, bc.as_deref(), *modulus, output)
        }
        Command::Contact { pair, chi, mu, v_s, about, export_surface } => {
            let params = ContactParams::new(*chi, *mu, *v_s)?;
            let quadrature = cli.quadrature.unwrap_or(Quadrature::Centroid);
            let a = load_body(&pair.a_mesh, &pair.a_field)?;
            let b = load_body(&pair.b_mesh, &pair.b_field)?;
            let (sa, sb) = states(pair);
            let surface = compute_contact_surface(&a, &sa.pose, &b, &sb.pose)?;
            if cli.verbose {
                eprintln!("{} polygons, {} triangles", surface.polygons.len(), surface.triangles.len());
            }
            let about = about.map(Point3::from).unwrap_or_else(|| sa.origin());
            let (on_a, on_b) = integrate_wrench(&surface, &sa, &sb, &params, about, quadrature)?;
            if let Some(path) = export_surface {
                write_surface(&surface, path)?;
            }
            print_json(&WrenchReport::new(&surface, &on_a, &on_b))
        }
        Command::Energy { pair } => {
            let a = load_body(&pair.a_mesh, &pair.a_field)?;
            let b = load_body(&pair.b_mesh, &pair.b_field)?;
            let (va, vb) = displaced_volume(&a, &pair.a_pose, &b, &pair.b_pose)?;
            print_json(&EnergyReport::new(&va, &vb))
        }
        Command::Simulate { scene, output } => {
            let mut scene = load_scene(scene)?;
            if let Some(q) = cli.quadrature {
                scene.quadrature = q;
            }
            let steps = scene.step_count();
            let verbose = cli.verbose;
            let trajectory = simulate_with(&scene, |s| {
                if verbose {
                    eprintln!("step {}/{steps} t = {:.6} s energy = {:.9e} J", s.step, s.time, s.energy.total());
                }
            })?;
            trajectory.write_csv_file(output)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    if cli.verbose {
        eprintln!("seed {}", cli.seed);
    }
    let result = run(&cli);
    if cli.verbose {
        eprintln!("done in {:.3} s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pfc: {e}");
            ExitCode::from(e.code())
        }
    }
}
