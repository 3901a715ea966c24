//! Two-room deceptive maze grid world.
//!
//! The agent starts in the first room, must press a button to open the door
//! in the dividing wall, and then reach the goal in the second room. Maps are
//! plain-text documents (see [`MazeMap::parse`]) and immutable once loaded;
//! all per-episode state lives in [`EnvState`].

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Empty,
    Wall,
    Goal,
    Button,
    Door,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Position {
    pub x: usize,
    pub y: usize,
}

impl Position {
    pub fn new(x: usize, y: usize) -> Self {
        Position { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub fn left(self) -> Self {
        match self {
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
            Heading::East => Heading::North,
        }
    }

    pub fn right(self) -> Self {
        match self {
            Heading::North => Heading::East,
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
        }
    }

    /// Unit step in grid coordinates (x grows east, y grows south).
    pub fn delta(self) -> (isize, isize) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Heading::North => 'N',
            Heading::East => 'E',
            Heading::South => 'S',
            Heading::West => 'W',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'N' => Some(Heading::North),
            'E' => Some(Heading::East),
            'S' => Some(Heading::South),
            'W' => Some(Heading::West),
            _ => None,
        }
    }
}

/// Agent actions, in output-neuron order. The order is part of the contract:
/// output neuron `k` drives `Action::ALL[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Stop,
    Left,
    Right,
    Straight,
    Press,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Stop,
        Action::Left,
        Action::Right,
        Action::Straight,
        Action::Press,
    ];
}

/// Binary wall sensors relative to the current heading: 0 = blocked, 1 = free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensorReading {
    pub left: u8,
    pub front: u8,
    pub right: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeMap {
    name: String,
    width: usize,
    height: usize,
    grid: Vec<CellKind>,
    starts: Vec<(Position, Heading)>,
    door_cells: Vec<Position>,
}

impl MazeMap {
    /// Parses a map document.
    ///
    /// Format: `name: <text>`, one `headingK: <N|E|S|W>` line per start,
    /// a blank line, then the grid rows. Grid characters: `#` wall,
    /// `.` empty, `G` goal, `B` button, `D` door, `1`..`9` start positions.
    pub fn parse(text: &str) -> Result<MazeMap> {
        let mut lines = text.lines();
        let name_line = lines
            .next()
            .ok_or_else(|| Error::MapParse("empty document".into()))?;
        let name = name_line
            .strip_prefix("name: ")
            .ok_or_else(|| Error::MapParse("first line must be `name: <text>`".into()))?
            .to_string();

        let mut headings = Vec::new();
        for line in lines.by_ref() {
            if line.is_empty() {
                break;
            }
            let expect = format!("heading{}: ", headings.len() + 1);
            let rest = line.strip_prefix(&expect).ok_or_else(|| {
                Error::MapParse(format!("expected `{expect}<N|E|S|W>`, got `{line}`"))
            })?;
            let mut chars = rest.chars();
            let (c, extra) = (chars.next(), chars.next());
            match (c.and_then(Heading::from_letter), extra) {
                (Some(h), None) => headings.push(h),
                _ => return Err(Error::MapParse(format!("bad heading `{rest}`"))),
            }
        }

        let mut grid = Vec::new();
        let mut starts: Vec<Option<Position>> = vec![None; headings.len()];
        let mut width = 0usize;
        let mut height = 0usize;
        for line in lines {
            if line.is_empty() {
                return Err(Error::MapParse("blank line inside grid".into()));
            }
            if height == 0 {
                width = line.chars().count();
            } else if line.chars().count() != width {
                return Err(Error::MapParse(format!("ragged row {height}")));
            }
            for (x, c) in line.chars().enumerate() {
                let kind = match c {
                    '#' => CellKind::Wall,
                    '.' => CellKind::Empty,
                    'G' => CellKind::Goal,
                    'B' => CellKind::Button,
                    'D' => CellKind::Door,
                    '1'..='9' => {
                        let idx = c as usize - '1' as usize;
                        if idx >= headings.len() {
                            return Err(Error::MapParse(format!(
                                "start `{c}` has no heading{} line",
                                idx + 1
                            )));
                        }
                        if starts[idx].is_some() {
                            return Err(Error::MapParse(format!("duplicate start `{c}`")));
                        }
                        starts[idx] = Some(Position::new(x, height));
                        CellKind::Empty
                    }
                    other => return Err(Error::MapParse(format!("bad character `{other}`"))),
                };
                grid.push(kind);
            }
            height += 1;
        }

        let starts = starts
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                p.map(|p| (p, headings[i]))
                    .ok_or_else(|| Error::MapParse(format!("heading{} has no start cell", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;

        MazeMap::from_grid(name, width, height, grid, starts)
    }

    /// Builds and validates a map from raw parts.
    pub fn from_grid(
        name: String,
        width: usize,
        height: usize,
        grid: Vec<CellKind>,
        starts: Vec<(Position, Heading)>,
    ) -> Result<MazeMap> {
        if grid.len() != width * height || width < 3 || height < 3 {
            return Err(Error::MapValidation("bad grid dimensions".into()));
        }
        let door_cells = (0..grid.len())
            .filter(|&i| grid[i] == CellKind::Door)
            .map(|i| Position::new(i % width, i / width))
            .collect();
        let map = MazeMap {
            name,
            width,
            height,
            grid,
            starts,
            door_cells,
        };
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        for x in 0..self.width {
            for y in [0, self.height - 1] {
                if self.cell(Position::new(x, y)) != CellKind::Wall {
                    return Err(Error::MapValidation("outer boundary must be wall".into()));
                }
            }
        }
        for y in 0..self.height {
            for x in [0, self.width - 1] {
                if self.cell(Position::new(x, y)) != CellKind::Wall {
                    return Err(Error::MapValidation("outer boundary must be wall".into()));
                }
            }
        }
        if !self.grid.contains(&CellKind::Goal) {
            return Err(Error::MapValidation("map has no goal cell".into()));
        }
        if !self.grid.contains(&CellKind::Button) {
            return Err(Error::MapValidation("map has no button cell".into()));
        }
        if self.starts.is_empty() {
            return Err(Error::MapValidation("map has no start position".into()));
        }
        for &(pos, _) in &self.starts {
            if self.cell(pos) != CellKind::Empty {
                return Err(Error::MapValidation(format!(
                    "start at ({}, {}) is not on an empty cell",
                    pos.x, pos.y
                )));
            }
        }
        // goal reachability from every start, door open
        DistanceField::compute(self)?;
        Ok(())
    }

    /// Serializes back to the document format; a parsed map re-serializes
    /// byte-for-byte.
    pub fn to_document(&self) -> String {
        let mut out = format!("name: {}\n", self.name);
        for (i, &(_, h)) in self.starts.iter().enumerate() {
            out.push_str(&format!("heading{}: {}\n", i + 1, h.letter()));
        }
        out.push('\n');
        for y in 0..self.height {
            for x in 0..self.width {
                let pos = Position::new(x, y);
                let c = match self.starts.iter().position(|&(p, _)| p == pos) {
                    Some(i) => char::from_digit(i as u32 + 1, 10).unwrap(),
                    None => match self.cell(pos) {
                        CellKind::Empty => '.',
                        CellKind::Wall => '#',
                        CellKind::Goal => 'G',
                        CellKind::Button => 'B',
                        CellKind::Door => 'D',
                    },
                };
                out.push(c);
            }
            out.push('\n');
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Variant of this map with a single replacement start, for per-cell
    /// sweeps. Unlike the document format, the start may sit on any cell
    /// that is passable while the door is closed (e.g. the button).
    pub fn with_start(&self, pos: Position, heading: Heading) -> Result<MazeMap> {
        if self.blocks(pos, false) {
            return Err(Error::MapValidation(format!(
                "start at ({}, {}) is not passable",
                pos.x, pos.y
            )));
        }
        let mut map = self.clone();
        map.starts = vec![(pos, heading)];
        Ok(map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell(&self, pos: Position) -> CellKind {
        self.grid[pos.y * self.width + pos.x]
    }

    pub fn starts(&self) -> &[(Position, Heading)] {
        &self.starts
    }

    pub fn door_cells(&self) -> &[Position] {
        &self.door_cells
    }

    pub fn in_bounds(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// True if the cell blocks movement given the current door state.
    pub fn blocks(&self, pos: Position, door_open: bool) -> bool {
        match self.cell(pos) {
            CellKind::Wall => true,
            CellKind::Door => !door_open,
            _ => false,
        }
    }

    /// Cells of the first room: the door-closed connected component that
    /// contains the start positions (door cells excluded).
    pub fn first_room_cells(&self) -> Vec<Position> {
        let seed = self.starts[0].0;
        let mut seen = vec![false; self.grid.len()];
        let mut queue = VecDeque::new();
        seen[seed.y * self.width + seed.x] = true;
        queue.push_back(seed);
        let mut cells = Vec::new();
        while let Some(pos) = queue.pop_front() {
            cells.push(pos);
            for (nx, ny) in neighbors4(pos) {
                if !self.in_bounds(nx, ny) {
                    continue;
                }
                let next = Position::new(nx as usize, ny as usize);
                let idx = next.y * self.width + next.x;
                if !seen[idx] && !self.blocks(next, false) {
                    seen[idx] = true;
                    queue.push_back(next);
                }
            }
        }
        cells.sort_by_key(|p| (p.y, p.x));
        cells
    }
}

fn neighbors4(pos: Position) -> [(isize, isize); 4] {
    let (x, y) = (pos.x as isize, pos.y as isize);
    [(x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y)]
}

/// Mutable per-episode state: agent pose, door and step counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvState<'m> {
    map: &'m MazeMap,
    pub agent_pos: Position,
    pub heading: Heading,
    pub door_open: bool,
    pub step_count: u32,
}

impl<'m> EnvState<'m> {
    /// Fresh episode state at the given start index, door closed.
    pub fn new(map: &'m MazeMap, start_index: usize) -> Self {
        let (pos, heading) = map.starts()[start_index];
        EnvState {
            map,
            agent_pos: pos,
            heading,
            door_open: false,
            step_count: 0,
        }
    }

    pub fn map(&self) -> &'m MazeMap {
        self.map
    }

    /// Reads the three adjacent cells relative to the heading.
    pub fn sense(&self) -> SensorReading {
        let free = |h: Heading| -> u8 {
            let (dx, dy) = h.delta();
            let (nx, ny) = (
                self.agent_pos.x as isize + dx,
                self.agent_pos.y as isize + dy,
            );
            if !self.map.in_bounds(nx, ny) {
                return 0;
            }
            let pos = Position::new(nx as usize, ny as usize);
            if self.map.blocks(pos, self.door_open) {
                0
            } else {
                1
            }
        };
        SensorReading {
            left: free(self.heading.left()),
            front: free(self.heading),
            right: free(self.heading.right()),
        }
    }

    /// Applies one action. Illegal moves are no-ops; `step_count` always
    /// increments.
    pub fn step(&mut self, action: Action) {
        match action {
            Action::Stop => {}
            Action::Left => self.heading = self.heading.left(),
            Action::Right => self.heading = self.heading.right(),
            Action::Straight => {
                let (dx, dy) = self.heading.delta();
                let (nx, ny) = (
                    self.agent_pos.x as isize + dx,
                    self.agent_pos.y as isize + dy,
                );
                if self.map.in_bounds(nx, ny) {
                    let target = Position::new(nx as usize, ny as usize);
                    if !self.map.blocks(target, self.door_open) {
                        self.agent_pos = target;
                    }
                }
            }
            Action::Press => {
                if self.map.cell(self.agent_pos) == CellKind::Button {
                    self.door_open = true;
                }
            }
        }
        self.step_count += 1;
    }

    pub fn reached_goal(&self) -> bool {
        self.map.cell(self.agent_pos) == CellKind::Goal
    }
}

/// Sentinel distance for unreachable (wall) cells.
pub const UNREACHABLE: i32 = -1;

/// BFS shortest-path distances to the nearest goal, computed on the
/// door-open variant of the map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    dist: Vec<i32>,
    pub door_distance: i32,
    pub max_dist: i32,
    pub max_dist_second_room: i32,
}

impl DistanceField {
    pub fn compute(map: &MazeMap) -> Result<DistanceField> {
        let (w, h) = (map.width(), map.height());
        let mut dist = vec![UNREACHABLE; w * h];
        let mut queue = VecDeque::new();
        for y in 0..h {
            for x in 0..w {
                let pos = Position::new(x, y);
                if map.cell(pos) == CellKind::Goal {
                    dist[y * w + x] = 0;
                    queue.push_back(pos);
                }
            }
        }
        while let Some(pos) = queue.pop_front() {
            let d = dist[pos.y * w + pos.x];
            for (nx, ny) in neighbors4(pos) {
                if !map.in_bounds(nx, ny) {
                    continue;
                }
                let next = Position::new(nx as usize, ny as usize);
                let idx = next.y * w + next.x;
                if dist[idx] == UNREACHABLE && !map.blocks(next, true) {
                    dist[idx] = d + 1;
                    queue.push_back(next);
                }
            }
        }

        let door_distance = map
            .door_cells()
            .iter()
            .map(|&p| dist[p.y * w + p.x])
            .filter(|&d| d != UNREACHABLE)
            .min()
            .unwrap_or(i32::MAX);
        let max_dist = dist.iter().copied().max().unwrap_or(0);
        // second room = door-closed component containing the goal
        let mut in_second = vec![false; w * h];
        let mut queue = VecDeque::new();
        for y in 0..h {
            for x in 0..w {
                if map.cell(Position::new(x, y)) == CellKind::Goal {
                    in_second[y * w + x] = true;
                    queue.push_back(Position::new(x, y));
                }
            }
        }
        while let Some(pos) = queue.pop_front() {
            for (nx, ny) in neighbors4(pos) {
                if !map.in_bounds(nx, ny) {
                    continue;
                }
                let next = Position::new(nx as usize, ny as usize);
                let idx = next.y * w + next.x;
                if !in_second[idx] && !map.blocks(next, false) {
                    in_second[idx] = true;
                    queue.push_back(next);
                }
            }
        }
        let max_dist_second_room = dist
            .iter()
            .zip(&in_second)
            .filter(|&(&d, &s)| s && d != UNREACHABLE)
            .map(|(&d, _)| d)
            .max()
            .unwrap_or(0);

        let field = DistanceField {
            width: w,
            height: h,
            dist,
            door_distance,
            max_dist,
            max_dist_second_room,
        };
        for &(pos, _) in map.starts() {
            if field.at(pos) == UNREACHABLE {
                return Err(Error::MapValidation(format!(
                    "start at ({}, {}) cannot reach the goal",
                    pos.x, pos.y
                )));
            }
        }
        Ok(field)
    }

    pub fn at(&self, pos: Position) -> i32 {
        self.dist[pos.y * self.width + pos.x]
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// CSV grid with `-1` for unreachable cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for y in 0..self.height {
            let row: Vec<String> = (0..self.width)
                .map(|x| self.at(Position::new(x, y)).to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Action::Stop => "stop",
            Action::Left => "left",
            Action::Right => "right",
            Action::Straight => "straight",
            Action::Press => "press",
        };
        f.write_str(s)
    }
}
