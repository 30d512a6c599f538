use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_height")]
    pub height: u32,
}

fn default_width() -> u32 {
    1920
}

fn default_height() -> u32 {
    1080
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        let k = CameraIntrinsics {
            fx,
            fy,
            cx,
            cy,
            width: default_width(),
            height: default_height(),
        };
        k.validate()?;
        Ok(k)
    }

    pub fn with_size(mut self, width: u32, height: u32) -> Result<Self> {
        self.width = width;
        self.height = height;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::Geometry("focal lengths must be positive".into()));
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy) {
            return Err(Error::Geometry("principal point outside the image".into()));
        }
        Ok(())
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        (0.0..self.width as f64).contains(&u) && (0.0..self.height as f64).contains(&v)
    }
}

/// Camera frame → robot base frame, from hand-eye calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    /// Meters.
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let t = RigidTransform { rotation, translation };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.rotation;
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        if err > 1e-9 {
            return Err(Error::Geometry(format!("rotation not orthonormal (error {err:e})")));
        }
        if (r.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::Geometry("rotation has determinant != 1".into()));
        }
        Ok(())
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }
}

/// Back-projects pixel (u, v) at `depth_m` along the optical axis into the
/// robot base frame.
pub fn pixel_to_base(
    u: f64,
    v: f64,
    depth_m: f64,
    k: &CameraIntrinsics,
    t: &RigidTransform,
) -> Result<Point3<f64>> {
    if !(depth_m > 0.0 && depth_m.is_finite()) {
        return Err(Error::Geometry(format!("depth {depth_m} must be positive")));
    }
    if !k.contains(u, v) {
        return Err(Error::Geometry(format!("pixel ({u}, {v}) outside the image")));
    }
    let cam = Point3::new(depth_m * (u - k.cx) / k.fx, depth_m * (v - k.cy) / k.fy, depth_m);
    Ok(t.apply(&cam))
}

/// Projects a base-frame point into the image; returns (u, v, depth).
pub fn base_to_pixel(p: &Point3<f64>, k: &CameraIntrinsics, t: &RigidTransform) -> Result<(f64, f64, f64)> {
    let cam = t.inverse().apply(p);
    if !(cam.z > 0.0) {
        return Err(Error::Geometry("point is behind the camera".into()));
    }
    Ok((k.fx * cam.x / cam.z + k.cx, k.fy * cam.y / cam.z + k.cy, cam.z))
}
