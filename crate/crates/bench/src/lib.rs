//! Fixtures shared by the benchmarks: a cluttered view in front of a camera
//! at the origin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dess_core::simulator::{render_depth, Aabb, Sphere, World};
use dess_core::{deproject, CameraIntrinsics, DepthImage, DepthIndex, Pose, Vec3, VehicleState};

pub struct Frame {
    pub world: World,
    pub pose: Pose,
    pub camera: CameraIntrinsics,
    pub image: DepthImage,
    pub index: DepthIndex,
    pub state: VehicleState,
    pub goal: Vec3,
}

/// `spheres` obstacles of radius 0.1-0.6 m with centres uniform in the
/// pixel × depth box between 1.4 and 6 m.
pub fn clutter_frame(spheres: usize, seed: u64) -> Frame {
    let camera = CameraIntrinsics::default();
    let pose = Pose::new(Vec3::zeros(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut world = World::empty(Aabb::from_extents([-8.0, 8.0, -8.0, 8.0, -8.0, 8.0]));
    for _ in 0..spheres {
        let x = rng.random_range(0.0..camera.width as f64);
        let y = rng.random_range(0.0..camera.height as f64);
        let c = deproject(x, y, rng.random_range(1.4..6.0), &camera).expect("positive depth");
        world.spheres.push(Sphere::new(pose.camera_to_world(&c), rng.random_range(0.1..0.6)));
    }
    let image = render_depth(&world, &pose, &camera, 20.0);
    let index = DepthIndex::new(&image);
    Frame {
        world,
        pose,
        camera,
        image,
        index,
        state: VehicleState::at_rest(Vec3::zeros(), 0.0),
        goal: Vec3::new(10.0, 0.0, 0.0),
    }
}
