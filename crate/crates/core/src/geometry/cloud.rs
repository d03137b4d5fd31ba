use super::{Aabb, GeometryError, Vec3};

/// Points with optional per-point normals and instance ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub instance_ids: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointCloud {
            points,
            normals: None,
            instance_ids: None,
        }
    }

    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<Self, GeometryError> {
        if normals.len() != self.points.len() {
            return Err(GeometryError::LengthMismatch);
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_instance_ids(mut self, ids: Vec<u32>) -> Result<Self, GeometryError> {
        if ids.len() != self.points.len() {
            return Err(GeometryError::LengthMismatch);
        }
        self.instance_ids = Some(ids);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.points)
    }

    pub fn instance_id(&self, i: usize) -> Option<u32> {
        self.instance_ids.as_ref().map(|ids| ids[i])
    }

    pub fn normal(&self, i: usize) -> Option<Vec3> {
        self.normals.as_ref().map(|n| n[i])
    }

    /// Sub-cloud with the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|n| indices.iter().map(|&i| n[i]).collect()),
            instance_ids: self
                .instance_ids
                .as_ref()
                .map(|ids| indices.iter().map(|&i| ids[i]).collect()),
        }
    }
}
