use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use twinarm::bench::generate_instance;
use twinarm::execution::{FeasibilityOracle, Method, MissionConfig};
use twinarm::scene::{generate_scene, load_scene, save_scene, ObjectId, RobotId, SceneParams};
use twinarm::sequencing::sequence_tasks;
use twinarm::traversability::{plans_for_both, SceneState};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn robot(scene: &twinarm::Scene, id: u32) -> PyResult<RobotId> {
    let id = RobotId(id);
    scene
        .robot(id)
        .map(|_| id)
        .ok_or_else(|| value_error(format!("unknown robot {id}")))
}

#[pyclass(module = "twinarm", frozen)]
struct Scene {
    inner: twinarm::Scene,
}

#[pymethods]
impl Scene {
    /// Random scene with `n` objects, identical to `twinarm gen`. With
    /// `solvable` set, sub-seeds are tried until neither arm can grab the
    /// target directly and clearing the clutter eventually frees it.
    #[staticmethod]
    #[pyo3(signature = (seed, n, solvable = false))]
    fn generate(seed: u64, n: usize, solvable: bool) -> PyResult<Self> {
        let params = SceneParams::with_objects(n);
        let inner = if solvable {
            generate_instance(&params, seed, 0)
        } else {
            generate_scene(seed, &params)
        };
        inner.map(|inner| Self { inner }).map_err(value_error)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        load_scene(text)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    fn to_json(&self) -> String {
        save_scene(&self.inner)
    }

    #[getter]
    fn target(&self) -> u32 {
        self.inner.target().0
    }

    #[getter]
    fn object_ids(&self) -> Vec<u32> {
        self.inner.objects().iter().map(|o| o.id.0).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Shortest relocation plan of each arm that has one, as
    /// `(robot, [object, ...])` with the target last.
    fn plans(&self) -> Vec<(u32, Vec<u32>)> {
        plans_for_both(&SceneState::new(&self.inner))
            .iter()
            .map(|p| (p.robot().0, p.sequence().iter().map(|o| o.0).collect()))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scene(objects={}, target={})",
            self.inner.len(),
            self.inner.target()
        )
    }
}

#[pyclass(module = "twinarm", frozen, get_all)]
struct Allocation {
    /// Robot id per relocation, in plan order.
    robots: Vec<u32>,
    objects: Vec<u32>,
    penalty: u32,
    turn_takings: u32,
    rate: Option<f64>,
    expansions: usize,
}

#[pymethods]
impl Allocation {
    fn __repr__(&self) -> String {
        format!(
            "Allocation(objects={:?}, robots={:?}, penalty={})",
            self.objects, self.robots, self.penalty
        )
    }
}

/// Optimal turn-taking assignment over both arms' plans on the initial
/// scene.
#[pyfunction]
#[pyo3(signature = (scene, budget = 100_000))]
fn search_allocate(scene: &Scene, budget: usize) -> PyResult<Allocation> {
    let state = SceneState::new(&scene.inner);
    let plans = plans_for_both(&state);
    let out = twinarm::search_allocate(&state, &plans, budget).map_err(value_error)?;
    let a = &out.allocation;
    Ok(Allocation {
        robots: a.assignees().iter().map(|r| r.0).collect(),
        objects: a.plan().sequence().iter().map(|o| o.0).collect(),
        penalty: a.penalty(),
        turn_takings: a.turn_takings(),
        rate: a.rate(),
        expansions: out.expansions,
    })
}

/// Greedy alternation, returned as `(object, robot)` steps.
#[pyfunction]
fn greedy_allocate(scene: &Scene) -> PyResult<Vec<(u32, u32)>> {
    let plans = plans_for_both(&SceneState::new(&scene.inner));
    twinarm::greedy_allocate(&scene.inner, &plans)
        .map(|s| s.map(|s| (s.object.0, s.robot.0)))
        .collect::<Result<_, _>>()
        .map_err(value_error)
}

#[pyclass(module = "twinarm", frozen)]
struct MissionLog {
    inner: twinarm::MissionLog,
}

#[pymethods]
impl MissionLog {
    #[getter]
    fn success(&self) -> bool {
        self.inner.success
    }

    /// `(object, robot)` per executed relocation.
    #[getter]
    fn relocations(&self) -> Vec<(u32, u32)> {
        self.inner.tasks().iter().map(|(o, r)| (o.0, r.0)).collect()
    }

    #[getter]
    fn makespan(&self) -> f64 {
        self.inner.makespan
    }

    #[getter]
    fn replanning_count(&self) -> usize {
        self.inner.replanning_count
    }

    #[getter]
    fn turn_takings(&self) -> u32 {
        twinarm::count_turn_takings(&self.inner.assignees()).0
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "MissionLog(success={}, relocations={}, makespan={:.3})",
            self.inner.success,
            self.inner.relocations.len(),
            self.inner.makespan
        )
    }
}

/// Executes a retrieval mission. `oracle` takes the CLI forms: `always`,
/// `blacklist:r1-o3,...` or `random:P:SEED`.
#[pyfunction]
#[pyo3(signature = (scene, method = "search", oracle = "always", budget = 100_000, seed = 0))]
fn run_mission(
    py: Python<'_>,
    scene: &Scene,
    method: &str,
    oracle: &str,
    budget: usize,
    seed: u64,
) -> PyResult<MissionLog> {
    let config = MissionConfig {
        method: method.parse::<Method>().map_err(value_error)?,
        oracle: oracle.parse::<FeasibilityOracle>().map_err(value_error)?,
        budget,
        random_seed: seed,
    };
    let inner = py.detach(|| twinarm::run_mission(&scene.inner, &config));
    Ok(MissionLog { inner })
}

#[pyclass(module = "twinarm", frozen, get_all)]
struct Timeline {
    makespan: f64,
    serial_makespan: f64,
    paired_slots: usize,
    json: String,
}

/// Schedules `(object, robot)` tasks into timed actions.
#[pyfunction]
fn sequence(scene: &Scene, tasks: Vec<(u32, u32)>) -> PyResult<Timeline> {
    let mut resolved = Vec::with_capacity(tasks.len());
    for (o, r) in tasks {
        let object = ObjectId(o);
        if scene.inner.object(object).is_none() {
            return Err(value_error(format!("unknown object {object}")));
        }
        resolved.push((object, robot(&scene.inner, r)?));
    }
    if resolved.last().map(|t| t.0) != Some(scene.inner.target()) {
        return Err(value_error("the last task must relocate the target"));
    }
    let tl = sequence_tasks(&scene.inner, &resolved);
    Ok(Timeline {
        makespan: tl.makespan,
        serial_makespan: tl.serial_makespan(),
        paired_slots: tl.paired_slots(),
        json: tl.to_json(),
    })
}

#[pymodule(name = "twinarm")]
fn twinarm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scene>()?;
    m.add_class::<Allocation>()?;
    m.add_class::<MissionLog>()?;
    m.add_class::<Timeline>()?;
    m.add_function(wrap_pyfunction!(search_allocate, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_allocate, m)?)?;
    m.add_function(wrap_pyfunction!(run_mission, m)?)?;
    m.add_function(wrap_pyfunction!(sequence, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
